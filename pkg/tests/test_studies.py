"""Additional replicate-study properties that reuse the session studies."""

import numpy as np


class TestBatchStudy:
    def test_posterior_means_inside_oracle_region(self, gaussian_study):
        for method in ("cv", "rt"):
            share = gaussian_study.inside_95[method].mean(axis=0)
            assert np.all(share >= 0.9), (method, share)

    def test_mean_field_omega_below_rt(self, gaussian_study):
        assert gaussian_study.accuracy["mfcv"][:, 0].mean() < \
            gaussian_study.accuracy["rt"][:, 0].mean()


class TestSequentialStudy:
    def test_single_update_matches_cold_batch(self, sequential_study):
        warm = sequential_study.accuracy["seqsvb"][1].mean()
        cold = sequential_study.cold_batch.mean()
        assert abs(warm - cold) <= 2.0

    def test_seqsvb_update_costs_more_than_uvb(self, sequential_study):
        secs = sequential_study.update_seconds
        seq = np.mean(secs["seqsvb"][500] + secs["seqsvb"][950])
        uvb = np.mean(secs["uvb"][500] + secs["uvb"][950])
        assert seq > uvb

    def test_uvb_degrades_with_more_updates(self, sequential_study):
        acc = sequential_study.accuracy["uvb"]
        assert acc[1].mean() >= acc[10].mean()
