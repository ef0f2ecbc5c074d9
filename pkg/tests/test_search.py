from toricstab.chow import INCONCLUSIVE, UNSTABLE, decide_chow, stability_functional
from toricstab.corpus import load_fixture
from toricstab.search import destabilizer_search


def test_square_stays_inconclusive():
    r = destabilizer_search(load_fixture("unit_square"), 1, budget=400)
    assert r.verdict == INCONCLUSIVE and r.certificate is None
    assert decide_chow(load_fixture("unit_square"), 1).verdict != UNSTABLE


def test_trapezoid_destabilizer_is_exact():
    poly = load_fixture("trapezoid")
    for i in (1, 2):
        r = destabilizer_search(poly, i, budget=400)
        assert r.verdict == UNSTABLE and r.verify()
        g = r.certificate.g
        assert stability_functional(poly, i, g) == r.certificate.value < 0
        assert all(v.denominator <= 10 ** 6 for v in r.certificate.phi.values)


def test_search_is_seeded():
    poly = load_fixture("trapezoid")
    a = destabilizer_search(poly, 2, budget=300, seed=4)
    b = destabilizer_search(poly, 2, budget=300, seed=4)
    assert a.to_json() == b.to_json()


def test_affine_direction_has_zero_functional_when_balanced():
    from toricstab.envelope import affine
    sq = load_fixture("unit_square")
    assert stability_functional(sq, 2, affine(sq, (1, -1), 0)) == 0
