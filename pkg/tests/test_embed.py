import numpy as np
import pytest
from hypothesis import given, strategies as st

from coupled_align.clinalg import fro
from coupled_align.embed import (
    align_error,
    dirichlet_objective,
    orthonormalize,
    phase_mixer,
    remix,
    spectral_embed,
)
from coupled_align.errors import ConfigError, DataError
from coupled_align.laplacian import build_laplacian, coupled_weight, generalized_spectrum, unitary
from coupled_align.verify import random_coupled, random_symmetric_weights

from conftest import K3

seeds = st.integers(0, 2**32 - 1)


def spectrum(seed, n=10):
    lap = random_coupled(np.random.default_rng(seed), n)
    return lap, generalized_spectrum(lap)


class TestSpectralEmbed:
    def test_single_column(self):
        lap, spec = spectrum(1)
        e = spectral_embed(spec, 1)
        v = spec.vectors[:, 1]
        assert np.linalg.norm(e.y) == pytest.approx(1, abs=1e-14)
        # parallel to the first nonconstant eigenvector
        assert abs(abs(np.vdot(v, e.y[:, 0])) - np.linalg.norm(v)) <= 1e-12

    def test_identical_datasets_global_phase(self, rng):
        w = random_symmetric_weights(rng, 8)
        spec = generalized_spectrum(build_laplacian(coupled_weight(w, w, 0.5, 0.5, 0.3, 0.7)))
        e = spectral_embed(spec, 2)
        assert e.orthonormality_residual() <= 1e-8
        assert e.subspace_residual() <= 1e-8
        ratio = e.y2 / e.y1
        np.testing.assert_allclose(ratio, ratio[0, 0], rtol=1e-8)

    def test_k3_objective(self):
        lap = build_laplacian(coupled_weight(K3, K3, 0.5, 0.5, 0.5, 0.5))
        e = spectral_embed(generalized_spectrum(lap), 2)
        # D = |d| exp(i theta) I with |d| = sqrt(2), so tr(Y*LY) = d (lam2 + lam3)
        assert dirichlet_objective(e.y, lap) == pytest.approx(2 * np.sqrt(2) * 3.0, abs=1e-12)

    def test_beats_random_alternatives(self, rng):
        lap, spec = spectrum(4, n=9)
        e = spectral_embed(spec, 2)
        span = orthonormalize(spec.vectors[:, spec.indices()])
        best = dirichlet_objective(e.y, lap)
        for _ in range(200):
            alt = span @ unitary(rng, span.shape[1], 2)
            assert best <= dirichlet_objective(alt, lap) + 1e-9

    def test_include_null(self):
        _, spec = spectrum(2)
        e = spectral_embed(spec, 1, include_null=True)
        col = e.y[:, 0]
        np.testing.assert_allclose(col / col[0], 1, atol=1e-10)

    @pytest.mark.parametrize("m", [0, 10])
    def test_m_out_of_range(self, m):
        _, spec = spectrum(3)
        with pytest.raises(ConfigError):
            spectral_embed(spec, m)

    def test_non_unitary_mixer(self):
        _, spec = spectrum(3)
        with pytest.raises(ConfigError):
            spectral_embed(spec, 2, mixer=2 * np.eye(2))

    @given(seeds, st.integers(1, 4))
    def test_invariants(self, seed, m):
        _, spec = spectrum(seed, n=8)
        e = spectral_embed(spec, m, mixer=phase_mixer(m))
        assert e.orthonormality_residual() <= 1e-8
        assert e.subspace_residual() <= 1e-8
        assert e.reconstruction_residual() <= 1e-8


class TestRemix:
    def test_identity(self):
        _, spec = spectrum(5)
        e = spectral_embed(spec, 3)
        assert np.array_equal(remix(e, np.eye(3)).y, e.y)

    def test_diagonal_phases(self):
        _, spec = spectrum(5)
        e = spectral_embed(spec, 3)
        ph = np.exp(1j * np.array([0.1, 1.0, -2.0]))
        r = remix(e, np.diag(ph))
        np.testing.assert_allclose(r.y, e.y * ph, atol=1e-15)
        assert r.orthonormality_residual() <= 1e-12

    def test_rejects_non_unitary(self):
        _, spec = spectrum(5)
        with pytest.raises(ConfigError):
            remix(spectral_embed(spec, 2), np.ones((2, 2)))

    @given(seeds)
    def test_objective_invariant_and_group_action(self, seed):
        gen = np.random.default_rng(seed)
        lap, spec = spectrum(seed, n=8)
        e = spectral_embed(spec, 3)
        u1, u2 = unitary(gen, 3), unitary(gen, 3)
        r = remix(e, u1)
        assert abs(dirichlet_objective(r.y, lap) - dirichlet_objective(e.y, lap)) <= 1e-9
        assert fro(remix(r, u2).y - remix(e, u1 @ u2).y) <= 1e-10
        assert r.subspace_residual() <= 1e-8


class TestAlignError:
    def test_identical(self, rng):
        y = rng.standard_normal((10, 2))
        assert align_error(y, y) == 0

    def test_two_points_reversed(self):
        y = np.array([[0.0, 0.0], [1.0, 0.0]])
        assert align_error(y, y[::-1]) == 1.0

    def test_random_is_half(self, rng):
        err = align_error(rng.standard_normal((500, 2)), rng.standard_normal((500, 2)))
        assert abs(err - 0.5) <= 0.05

    def test_shape_mismatch(self):
        with pytest.raises(DataError):
            align_error(np.zeros((3, 2)), np.zeros((4, 2)))

    @given(seeds)
    def test_symmetric_and_rotation_invariant(self, seed):
        gen = np.random.default_rng(seed)
        y1, y2 = gen.standard_normal((15, 2)), gen.standard_normal((15, 2))
        assert align_error(y1, y2) == align_error(y2, y1)
        c, s = np.cos(0.7), np.sin(0.7)
        r = np.array([[c, -s], [s, c]])
        assert align_error(y1 @ r, y2 @ r) == pytest.approx(align_error(y1, y2), abs=1e-12)
