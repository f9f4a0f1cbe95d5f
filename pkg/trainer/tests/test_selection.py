"""Codebook construction, Gumbel-Softmax relaxation, block assembly."""

import numpy as np
import pytest
import torch

from dliabt.selection import assemble_block_diag, codebook_beams, gumbel_select, sample_gumbel


class TestCodebook:
    def test_grid_and_normalization(self):
        beams = codebook_beams(n_q=4, n_a=4)
        norms = torch.linalg.norm(beams, dim=1)
        torch.testing.assert_close(norms, torch.ones(4), atol=1e-6, rtol=0)
        torch.testing.assert_close(beams.abs(), torch.full((4, 4), 0.5), atol=1e-6, rtol=0)

    def test_matches_steering_formula(self):
        beams = codebook_beams(n_q=8, n_a=4, dtype=torch.complex128)
        for i in range(8):
            sin_t = -1 + 2 * (i + 1) / 8
            expected = np.exp(1j * np.pi * np.arange(4) * sin_t) / 2.0
            np.testing.assert_allclose(beams[i].numpy(), expected, atol=1e-12)


class TestGumbelSelect:
    BEAMS = codebook_beams(8, 4)

    def test_probabilities_sum_to_one(self):
        logits = torch.randn(16, 2, 8, generator=torch.Generator().manual_seed(0))
        probs, _ = gumbel_select(logits, 0.7, self.BEAMS, generator=torch.Generator().manual_seed(1))
        torch.testing.assert_close(probs.sum(-1), torch.ones(16, 2), atol=1e-6, rtol=0)

    def test_zero_noise_low_temperature_is_one_hot(self):
        logits = torch.tensor([[[0.1, 2.0, -1.0, 0.0, 0.3, 0.0, 0.0, 0.5]]])
        probs, beams = gumbel_select(
            logits, 1e-3, self.BEAMS, gumbel_noise=torch.zeros_like(logits)
        )
        assert probs[0, 0, 1] > 1 - 1e-6
        torch.testing.assert_close(beams[0, 0], self.BEAMS[1], atol=1e-4, rtol=0)

    def test_soft_beam_is_convex_combination(self):
        logits = torch.randn(4, 2, 8, generator=torch.Generator().manual_seed(2))
        probs, beams = gumbel_select(logits, 1.0, self.BEAMS, generator=torch.Generator().manual_seed(3))
        expected = probs.to(torch.complex64) @ self.BEAMS
        torch.testing.assert_close(beams, expected)

    def test_eval_mode_returns_argmax_and_hard_beams(self):
        logits = torch.randn(4, 2, 8, generator=torch.Generator().manual_seed(4))
        indices, beams = gumbel_select(logits, 1.0, self.BEAMS, mode="eval")
        torch.testing.assert_close(indices, logits.argmax(-1))
        torch.testing.assert_close(beams, self.BEAMS[indices])

    def test_nonpositive_temperature_rejected_in_train_mode(self):
        logits = torch.zeros(1, 1, 8)
        with pytest.raises(ValueError):
            gumbel_select(logits, 0.0, self.BEAMS, mode="train")

    def test_uniform_logits_uniform_argmax_frequencies(self):
        # Gumbel-perturbed argmax of equal logits is a uniform categorical.
        n_q, draws = 8, 100_000
        gen = torch.Generator().manual_seed(5)
        noise = sample_gumbel((draws, n_q), generator=gen)
        counts = torch.bincount(noise.argmax(-1), minlength=n_q).float()
        p = 1 / n_q
        sigma = (draws * p * (1 - p)) ** 0.5
        assert torch.all((counts - draws * p).abs() < 3 * sigma)


class TestAssembleBlockDiag:
    def test_block_structure(self):
        beams = torch.arange(1, 13, dtype=torch.float32).reshape(2, 3, 2)
        beams = torch.complex(beams, torch.zeros_like(beams))
        f = assemble_block_diag(beams)
        assert f.shape == (2, 6, 3)
        for n in range(3):
            torch.testing.assert_close(f[:, 2 * n : 2 * n + 2, n], beams[:, n])
        mask = torch.ones(6, 3, dtype=torch.bool)
        for n in range(3):
            mask[2 * n : 2 * n + 2, n] = False
        assert torch.all(f[:, mask] == 0)
