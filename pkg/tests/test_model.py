import json

import numpy as np
import pytest

from hfosc import fixtures
from hfosc.errors import ConjugacyError, SchemaError
from hfosc.model import (
    ProblemSpec,
    TrigMatrixPoly,
    TrigVectorPoly,
    parse_problem,
    serialize_problem,
)


def _base_doc():
    return {
        "n": 2,
        "m": 1,
        "real_mode": True,
        "A0": [[0.0, 0.0], [0.0, -1.0]],
        "B0": [[1.0, 0.0], [0.0, 1.0]],
        "B": {"1": [[0.0, 0.1], [0.0, 0.0]], "-1": [[0.0, 0.1], [0.0, 0.0]]},
        "d": {"0": [1.0, 0.0]},
    }


def test_round_trip_canonical_fixtures():
    for spec in (
        fixtures.borderline_stable(),
        fixtures.borderline_unstable(),
        fixtures.forced_borderline(),
        fixtures.degenerate_example(),
        fixtures.scalar_decay(),
    ):
        doc = serialize_problem(spec)
        assert parse_problem(doc) == spec
        # and through actual JSON text, which is how documents travel
        assert parse_problem(json.loads(json.dumps(doc))) == spec


def test_round_trip_random_instances():
    for seed in range(5):
        spec = fixtures.random_admissible(seed + 1, n=3, m=2, s=1)
        assert parse_problem(serialize_problem(spec)) == spec
    spec = fixtures.random_admissible(9, n=3, m=1, s=1, real_mode=False)
    assert not spec.real_mode
    assert parse_problem(serialize_problem(spec)) == spec


def test_round_trip_is_bit_exact():
    spec = fixtures.random_admissible(4, n=3, m=1, s=1)
    doc = serialize_problem(spec)
    again = serialize_problem(parse_problem(json.loads(json.dumps(doc))))
    assert json.dumps(doc) == json.dumps(again)


def test_parse_accepts_meta_field():
    doc = _base_doc()
    doc["meta"] = {"note": "anything"}
    parse_problem(doc)


def test_parse_accepts_bare_numbers_in_real_mode():
    spec = parse_problem(_base_doc())
    assert spec.A0[1, 1] == -1.0


def test_serialization_always_emits_pairs():
    doc = serialize_problem(parse_problem(_base_doc()))
    assert doc["A0"][0][0] == [0.0, 0.0]
    assert doc["d"]["0"][0] == [1.0, 0.0]


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.pop("A0"),
        lambda d: d.pop("d"),
        lambda d: d.update(n="2"),
        lambda d: d.update(n=True),
        lambda d: d.update(n=0),
        lambda d: d.update(m=-1),
        lambda d: d.update(real_mode="yes"),
        lambda d: d.update(A0=[[0.0, 0.0]]),
        lambda d: d.update(A0=[[0.0], [0.0]]),
        lambda d: d.update(A0=[[0.0, "x"], [0.0, 0.0]]),
        lambda d: d.update(A0=[[0.0, [1.0]], [0.0, 0.0]]),
        lambda d: d.update(A0=[[0.0, [1.0, 2.0, 3.0]], [0.0, 0.0]]),
        lambda d: d.update(B=[[0.0, 0.0], [0.0, 0.0]]),
        lambda d: d["B"].update({"0": [[0.0, 0.0], [0.0, 0.0]]}),
        lambda d: d["B"].update({"+1": [[0.0, 0.0], [0.0, 0.0]]}),
        lambda d: d["B"].update({"1.5": [[0.0, 0.0], [0.0, 0.0]]}),
        lambda d: d["B"].update({"2": [[0.1, 0.0], [0.0, 0.0]]}),
        lambda d: d["d"].update({"-2": [0.1, 0.0]}),
        lambda d: d.update(extra=1),
    ],
)
def test_parse_rejects_malformed_documents(mutate):
    doc = _base_doc()
    mutate(doc)
    with pytest.raises(SchemaError):
        parse_problem(doc)


def test_complex_mode_requires_pairs():
    doc = _base_doc()
    doc["real_mode"] = False
    # conjugate symmetry no longer applies, but bare numbers are now invalid
    with pytest.raises(SchemaError):
        parse_problem(doc)
    paired = {
        "n": 1,
        "m": 0,
        "real_mode": False,
        "A0": [[[0.0, 1.0]]],
        "B0": [[[0.0, 0.0]]],
        "B": {},
        "d": {},
    }
    spec = parse_problem(paired)
    assert spec.A0[0, 0] == 1j


def test_conjugacy_missing_partner():
    doc = _base_doc()
    del doc["B"]["-1"]
    with pytest.raises(ConjugacyError):
        parse_problem(doc)


def test_conjugacy_imaginary_stationary_part():
    doc = _base_doc()
    doc["A0"][0][0] = [0.0, 1e-6]
    with pytest.raises(ConjugacyError):
        parse_problem(doc)


def test_conjugacy_mismatched_forcing():
    doc = _base_doc()
    doc["m"] = 1
    doc["d"] = {"1": [[0.0, 0.5], [0.0, 0.0]], "-1": [[0.0, 0.5], [0.0, 0.0]]}
    # d_{-1} must be the conjugate, i.e. [0, -0.5] in the first entry
    with pytest.raises(ConjugacyError):
        parse_problem(doc)
    doc["d"]["-1"] = [[0.0, -0.5], [0.0, 0.0]]
    parse_problem(doc)


def test_conjugacy_not_enforced_in_complex_mode():
    doc = {
        "n": 1,
        "m": 1,
        "real_mode": False,
        "A0": [[[0.0, 0.0]]],
        "B0": [[[0.0, 0.0]]],
        "B": {"1": [[[1.0, 2.0]]]},  # no "-1" partner at all
        "d": {},
    }
    spec = parse_problem(doc)
    assert spec.B[1][0, 0] == 1 + 2j


def test_zero_coefficients_are_dropped():
    spec = ProblemSpec(
        n=1,
        m=1,
        A0=[[0.0]],
        B0=[[1.0]],
        B={1: [[0.0]], -1: [[0.0]]},
        d={0: [0.0]},
    )
    assert spec.B == {}
    assert spec.d == {}
    assert spec == ProblemSpec(n=1, m=1, A0=[[0.0]], B0=[[1.0]])


def test_spec_arrays_are_read_only():
    spec = fixtures.borderline_stable()
    with pytest.raises(ValueError):
        spec.A0[0, 0] = 5.0


# -- trig polynomials -------------------------------------------------------


def _random_vec_poly(rng, n=3, harmonics=(-2, -1, 1, 3)):
    return TrigVectorPoly(
        n, {l: rng.standard_normal(n) + 1j * rng.standard_normal(n) for l in harmonics}
    )


def test_vector_poly_evaluates_like_the_sum():
    rng = np.random.default_rng(12)
    poly = _random_vec_poly(rng)
    taus = rng.uniform(0, 2 * np.pi, size=7)
    direct = sum(
        np.exp(1j * l * taus)[:, None] * c for l, c in poly.coeffs.items()
    )
    assert np.allclose(poly(taus), direct, atol=1e-14)
    assert np.allclose(poly(taus[0]), direct[0], atol=1e-14)


def test_vector_poly_derivative_inverts_antiderivative():
    rng = np.random.default_rng(5)
    poly = _random_vec_poly(rng)
    back = poly.antiderivative().derivative()
    assert back.support() == poly.support()
    for l in poly.support():
        assert np.allclose(back.coeffs[l], poly.coeffs[l], rtol=1e-13, atol=1e-14)
    assert np.array_equal(poly.antiderivative().mean(), np.zeros(3))


def test_antiderivative_rejects_nonzero_mean():
    poly = TrigVectorPoly(2, {0: [1.0, 0.0], 1: [0.0, 1.0]})
    with pytest.raises(ValueError):
        poly.antiderivative()


def test_matrix_poly_product_matches_pointwise_values():
    rng = np.random.default_rng(7)
    for _ in range(5):
        a = TrigMatrixPoly(
            2, {l: rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
                for l in (-1, 0, 2)}
        )
        b = TrigMatrixPoly(
            2, {l: rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
                for l in (-2, 1)}
        )
        taus = rng.uniform(0, 2 * np.pi, size=5)
        prod = a @ b
        for tau in taus:
            assert np.allclose(prod(tau), a(tau) @ b(tau), atol=1e-12)
        v = _random_vec_poly(rng, n=2, harmonics=(-1, 0, 1))
        applied = a.apply(v)
        for tau in taus:
            assert np.allclose(applied(tau), a(tau) @ v(tau), atol=1e-12)


def test_matrix_poly_mean_picks_the_zero_harmonic():
    rng = np.random.default_rng(3)
    a = TrigMatrixPoly(2, {0: rng.standard_normal((2, 2)), 3: rng.standard_normal((2, 2))})
    grid = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    quad = np.mean([a(t) for t in grid], axis=0)
    assert np.allclose(a.mean(), quad, atol=1e-13)


def test_system_matrix_and_forcing():
    spec = fixtures.random_admissible(2, n=3, m=2, s=1)
    tau, omega = 0.7, 55.0
    M = spec.A0 + spec.B0 / omega
    for l, Bl in spec.B.items():
        M = M + np.exp(1j * l * tau) * Bl
    assert np.allclose(spec.system_matrix(tau, omega), M, atol=1e-14)
    f = sum(np.exp(1j * l * tau) * v for l, v in spec.d.items())
    assert np.allclose(spec.forcing(tau), f, atol=1e-14)
    unforced = fixtures.borderline_stable()
    assert np.array_equal(unforced.forcing(tau), np.zeros(3))
    assert np.array_equal(unforced.d0, np.zeros(3))
