import json

import numpy as np
import pytest

import nistab as ns
from nistab.errors import DimensionError, IllPosedError, SingularAtSError

from conftest import double_integrator, first_order_lag_minus


class TestEvalTf:
    def test_double_integrator(self):
        G = ns.eval_tf(double_integrator(), 2j)
        np.testing.assert_allclose(G, [[-0.25]], atol=1e-14)

    def test_irc_dc_gain(self, paper_irc):
        G0 = ns.eval_tf(paper_irc.realization, 0.0)
        np.testing.assert_allclose(
            G0, [[-2.2029, -1.0650], [-1.0650, -0.6971]], atol=5e-5)

    def test_high_frequency_limit_is_d(self, paper_irc):
        G = ns.eval_tf(paper_irc.realization, 1e9)
        np.testing.assert_allclose(G, paper_irc.realization.D, atol=1e-6)

    def test_singular_at_pole(self):
        m = ns.StateSpaceModel([[0.0]], [[1.0]], [[1.0]], [[0.0]])
        with pytest.raises(SingularAtSError):
            ns.eval_tf(m, 0.0)


class TestMinimal:
    def test_scalar_integrator(self):
        m = ns.StateSpaceModel([[0.0]], [[1.0]], [[1.0]], [[0.0]])
        assert ns.is_minimal(m)

    def test_unreachable_state(self):
        m = ns.StateSpaceModel(np.diag([-1.0, -2.0]), [[1.0], [0.0]],
                               [[1.0, 0.0]], [[0.0]])
        assert not ns.is_minimal(m)

    def test_case_study_plant(self, arm_plant):
        assert ns.is_minimal(arm_plant)

    def test_similarity_invariance(self, rng, arm_plant):
        for _ in range(10):
            T = np.eye(arm_plant.n) + 0.4 * rng.normal(size=(arm_plant.n,) * 2)
            assert ns.is_minimal(ns.similarity_transform(arm_plant, T))


class TestClosedLoop:
    def test_strictly_proper_plant_structure(self, paper_irc, arm_plant):
        cl = ns.closed_loop(arm_plant, paper_irc.realization)
        G, Gb = arm_plant, paper_irc.realization
        top = np.hstack([G.A + G.B @ Gb.D @ G.C, G.B @ Gb.C])
        bot = np.hstack([Gb.B @ G.C, Gb.A])
        np.testing.assert_allclose(cl.Abreve, np.vstack([top, bot]), atol=1e-13)

    def test_characteristic_polynomial(self):
        cl = ns.closed_loop(double_integrator(), first_order_lag_minus(2.0))
        coeffs = np.poly(cl.Abreve)
        np.testing.assert_allclose(coeffs, [1.0, 1.0, 2.0, 1.0], atol=1e-10)

    def test_ill_posed_static_loop(self):
        g = ns.StateSpaceModel(np.zeros((0, 0)), np.zeros((0, 1)),
                               np.zeros((1, 0)), [[0.5]])
        gb = ns.StateSpaceModel(np.zeros((0, 0)), np.zeros((0, 1)),
                                np.zeros((1, 0)), [[2.0]])
        with pytest.raises(IllPosedError):
            ns.closed_loop(g, gb)

    def test_spectrum_invariant_under_similarity(self, rng):
        g = double_integrator()
        gb = first_order_lag_minus(2.0)
        ref = np.sort_complex(np.linalg.eigvals(ns.closed_loop(g, gb).Abreve))
        for _ in range(10):
            T = np.eye(2) + 0.4 * rng.normal(size=(2, 2))
            g2 = ns.similarity_transform(g, T)
            got = np.sort_complex(np.linalg.eigvals(ns.closed_loop(g2, gb).Abreve))
            np.testing.assert_allclose(got, ref, atol=1e-8)


class TestHurwitz:
    def test_stable(self):
        assert ns.is_hurwitz(np.diag([-1.0, -2.0]))

    def test_marginal(self):
        assert not ns.is_hurwitz(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_case_study_loop(self, arm_plant, paper_irc):
        cl = ns.closed_loop(arm_plant, paper_irc.realization)
        assert ns.is_hurwitz(cl.Abreve)


class TestModalToSs:
    def test_pure_double_integrator_term(self):
        mm = ns.ModalModel(m=1, g2=[[1.0]])
        model = ns.modal_to_ss(mm)
        np.testing.assert_array_equal(model.A, [[0.0, 1.0], [0.0, 0.0]])
        np.testing.assert_array_equal(model.B, [[0.0], [1.0]])
        np.testing.assert_array_equal(model.C, [[1.0, 0.0]])

    def test_single_mode_dc_value(self):
        mm = ns.ModalModel(m=1, terms=((2.0, [[3.0]]),))
        model = ns.modal_to_ss(mm)
        np.testing.assert_allclose(ns.eval_tf(model, 0.0), [[3.0 / 4.0]], atol=1e-12)

    def test_case_study_round_trip(self, beam_params):
        mm = ns.finite_dim_approx(beam_params, 1)
        model = ns.modal_to_ss(mm)
        np.testing.assert_allclose(
            ns.eval_tf(model, 1j), mm.evaluate(1j), atol=1e-10)

    def test_round_trip_random_models(self, rng):
        from nistab.freebody import random_ni_plant, _FAMILIES

        for trial in range(16):
            fam = _FAMILIES[trial % len(_FAMILIES)]
            model, mm = random_ni_plant(
                np.random.default_rng(rng.integers(0, 2 ** 63)), fam)
            for _ in range(20):
                s = complex(rng.normal(), rng.normal()) * 3.0
                if abs(s) < 0.3 or min(abs(s - 1j * p) for p, _ in mm.terms or
                                       [(1e9, None)]) < 0.2:
                    continue
                ref = mm.evaluate(s)
                got = ns.eval_tf(model, s)
                assert np.linalg.norm(got - ref) <= 1e-9 * max(1.0, np.linalg.norm(ref))

    def test_mixed_terms_minimal(self):
        # 1/s content inside and outside the double-pole range
        g1 = np.array([[0.5, 1.0], [1.0, 0.7]])
        g2 = np.array([[1.0, 0.0], [0.0, 0.0]])
        mm = ns.ModalModel(m=2, terms=((3.0, np.eye(2)),), g1=g1, g2=g2)
        model = ns.modal_to_ss(mm)
        assert ns.is_minimal(model)
        s = 0.7 + 1.1j
        np.testing.assert_allclose(ns.eval_tf(model, s), mm.evaluate(s), atol=1e-12)

    def test_decreasing_poles_rejected(self):
        with pytest.raises(DimensionError):
            ns.ModalModel(m=1, terms=((2.0, [[1.0]]), (1.0, [[1.0]])))


class TestJsonFormat:
    def test_round_trip(self, arm_plant):
        text = ns.model_to_json(arm_plant)
        back = ns.model_from_json(text)
        np.testing.assert_array_equal(back.A, arm_plant.A)
        np.testing.assert_array_equal(back.D, arm_plant.D)

    def test_rejects_nan(self):
        with pytest.raises(DimensionError):
            ns.model_from_dict({"A": [[float("nan")]], "B": [[1.0]], "C": [[1.0]]})

    def test_rejects_ragged(self):
        with pytest.raises(DimensionError):
            ns.model_from_dict({"A": [[0.0, 1.0], [0.0]], "B": [[0.0], [1.0]],
                                "C": [[1.0, 0.0]]})

    def test_rejects_missing_key(self):
        with pytest.raises(DimensionError):
            ns.model_from_json(json.dumps({"A": [[0.0]], "B": [[1.0]]}))

    def test_rejects_bool_entries(self):
        with pytest.raises(DimensionError):
            ns.model_from_dict({"A": [[True]], "B": [[1.0]], "C": [[1.0]]})
