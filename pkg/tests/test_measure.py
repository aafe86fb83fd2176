import json

import numpy as np
import pytest

from qcover import (
    ConsistencyError,
    DecoherenceFunctional,
    HistorySpace,
    InfeasibleNormalizationError,
    ResourceLimitError,
    d_of,
    identity_suite,
    interference,
    load_functional,
    measure_level,
    mu,
    mu_table,
    sample_spd,
    save_functional,
    validate,
    verify_identity,
)


class TestFunctionalConstruction:
    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            DecoherenceFunctional(np.zeros((2, 3)))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            DecoherenceFunctional(np.array([[np.nan, 0], [0, 1.0]]))

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            DecoherenceFunctional(np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_hermitize_symmetrizes(self):
        d = DecoherenceFunctional(
            np.array([[1.0, 1.0], [0.0, 1.0]]), hermitize=True
        )
        assert np.allclose(d.entries, [[1.0, 0.5], [0.5, 1.0]])

    def test_entries_read_only(self, d2):
        with pytest.raises(ValueError):
            d2.entries[0, 0] = 9.0

    def test_json_roundtrip(self, d3, tmp_path):
        clone = DecoherenceFunctional.from_json(d3.to_json())
        assert clone == d3
        path = tmp_path / "d.json"
        save_functional(d3, str(path))
        assert load_functional(str(path)) == d3
        raw = json.loads(path.read_text())
        assert raw["n"] == 3
        assert len(raw["entries"]) == 3
        assert len(raw["entries"][0][0]) == 2

    def test_complex_hermitian_accepted(self):
        m = np.array([[1.0, 0.5j], [-0.5j, 1.0]])
        d = DecoherenceFunctional(m)
        assert d.n == 2
        clone = DecoherenceFunctional.from_json(d.to_json())
        assert clone == d


class TestMeasureValues:
    def test_two_slit(self, d2):
        space = d2.space
        assert mu(d2, space.event([1])) == pytest.approx(0.5)
        assert mu(d2, space.omega()) == pytest.approx(0.0, abs=1e-15)
        assert d_of(d2, space.event([1]), space.event([2])) == pytest.approx(-0.5)

    def test_three_slit(self, d3):
        space = d3.space
        assert mu(d3, space.event([1, 2])) == pytest.approx(0.0, abs=1e-12)
        assert mu(d3, space.event([2, 3])) == pytest.approx(0.0, abs=1e-12)
        assert mu(d3, space.event([1, 3])) == pytest.approx(4.0 / 3.0)
        assert mu(d3, space.omega()) == pytest.approx(1.0 / 3.0)

    def test_table_matches_pointwise(self, d3):
        table = mu_table(d3)
        space = d3.space
        for m in range(1 << 3):
            assert table[m] == pytest.approx(
                mu(d3, space.event_from_mask(m)), abs=1e-12
            )

    def test_empty_event_measures_zero(self, d3):
        assert mu(d3, d3.space.empty()) == 0.0


class TestInterference:
    def test_pair_term(self, d2):
        space = d2.space
        i2 = interference(d2, (space.event([1]), space.event([2])))
        assert i2 == pytest.approx(-1.0)

    def test_triple_vanishes(self):
        d = sample_spd(6, rank=4, seed=11)
        space = d.space
        parts = (space.event([1, 2]), space.event([3]), space.event([4, 6]))
        assert interference(d, parts) == pytest.approx(0.0, abs=1e-10)

    def test_validation(self, d2):
        space = d2.space
        with pytest.raises(ValueError):
            interference(d2, (space.event([1]),))
        with pytest.raises(ValueError):
            interference(d2, (space.event([1]), space.event([1, 2])))
        with pytest.raises(ValueError):
            interference(d2, (space.event([1]), space.empty()))


class TestMeasureLevel:
    def test_diagonal_is_classical(self, diag4):
        assert measure_level(diag4, 3) == 1

    def test_interfering_is_quadratic(self, d3):
        assert measure_level(d3, 2) == 2

    def test_budget(self):
        d = sample_spd(8, rank=8, seed=1)
        with pytest.raises(ResourceLimitError):
            measure_level(d, 5, budget=10)


class TestIdentity:
    def test_residual_small_on_samples(self):
        for seed in range(5):
            d = sample_spd(6, rank=3, seed=seed)
            assert verify_identity(d) <= 1e-12 * max(1.0, d.scale)

    def test_identity_suite_report(self):
        rep = identity_suite(4, 10, 7)
        data = rep.to_json()
        assert data["n"] == 4 and data["samples"] == 10
        assert rep.max_identity_residual <= 1e-12
        assert rep.max_triple_interference <= 1e-12
        assert rep.max_pair_zero_dev <= 1e-9
        assert rep.max_single_zero_dev <= 1e-9
        assert rep.min_cauchy_schwarz_slack >= -1e-12
        assert rep.min_sandwich_lower_slack >= -1e-12
        assert rep.min_sandwich_upper_slack >= -1e-12
        assert rep.kernel_disagreements == 0

    def test_identity_suite_caps(self):
        with pytest.raises(ResourceLimitError):
            identity_suite(11, 1, 0)
        with pytest.raises(ValueError):
            identity_suite(4, 0, 0)


class TestSampling:
    def test_deterministic_per_seed(self):
        a = sample_spd(5, rank=3, seed=9)
        b = sample_spd(5, rank=3, seed=9)
        c = sample_spd(5, rank=3, seed=10)
        assert a == b
        assert a != c

    def test_tuple_seed(self):
        a = sample_spd(5, rank=3, seed=(9, 1))
        b = sample_spd(5, rank=3, seed=(9, 2))
        assert a != b

    def test_annihilate(self):
        space = HistorySpace(6)
        targets = (space.event([1, 4]), space.event([2, 3, 5]))
        d = sample_spd(6, rank=3, seed=21, annihilate=targets)
        for t in targets:
            assert abs(mu(d, t)) <= 1e-10
        assert mu(d, space.omega()) > 1e-6

    def test_normalize(self):
        d = sample_spd(5, rank=2, seed=3, normalize=True)
        assert mu(d, d.space.omega()) == pytest.approx(1.0, abs=1e-12)

    def test_infeasible_normalization(self):
        space = HistorySpace(3)
        with pytest.raises(InfeasibleNormalizationError):
            sample_spd(3, rank=2, seed=1,
                       annihilate=tuple(space.singletons()), normalize=True)

    def test_rank_bounds(self):
        with pytest.raises(ValueError):
            sample_spd(3, rank=0, seed=1)
        with pytest.raises(ValueError):
            sample_spd(3, rank=4, seed=1)

    def test_strongly_positive(self):
        for seed in range(4):
            d = sample_spd(5, rank=3, seed=seed)
            assert validate(d).strongly_positive


class TestValidate:
    def test_three_slit_report(self, d3):
        rep = validate(d3, max_level=2)
        assert rep.hermitian
        assert rep.strongly_positive
        assert rep.weakly_positive
        assert not rep.normalized
        assert rep.total_measure == pytest.approx(1.0 / 3.0)
        assert rep.level == 2
        data = rep.to_json()
        assert data["level"] == 2 and data["hermitian"] is True

    def test_indefinite_matrix(self):
        d = DecoherenceFunctional(np.array([[1.0, -2.0], [-2.0, 1.0]]))
        rep = validate(d)
        assert rep.hermitian
        assert not rep.strongly_positive
        assert not rep.weakly_positive
        assert rep.min_measure == pytest.approx(-2.0)

    def test_diagonal_classical(self, diag4):
        rep = validate(diag4, max_level=2)
        assert rep.strongly_positive and rep.weakly_positive
        assert rep.normalized
        assert rep.level == 1
