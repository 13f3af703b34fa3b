"""Dataset-module checks: labeling, statistics, features, persistence."""

import math

import numpy as np
import pytest

import qutritml.dataset as ds
from qutritml.errors import PreconditionError
from qutritml.qmat import fidelity, is_ppt, sqrtm_psd
from qutritml.sampler import SeedSpec, random_density_hs, random_separable_mixture
from qutritml.tomo import encode
from qutritml.witness import DEFAULT_EPSILON


def labeled(rho, label, gr=0.0, origin=ds.ORIGIN_RANDOM):
    return ds.LabeledState(rho=rho, label=label, gr=gr, origin=origin,
                           seed_trace=SeedSpec(0, 0))


class TestLabeling:
    def test_npt_draw(self):
        rho = random_density_hs(9, SeedSpec(11, 16))
        assert not is_ppt(rho)
        st = ds.label_random_state(rho, DEFAULT_EPSILON, seed=SeedSpec(11, 17))
        assert st.label == "NPT"
        assert st.gr > DEFAULT_EPSILON
        assert st.origin == ds.ORIGIN_RANDOM

    def test_separable_mixture(self):
        sigma = random_separable_mixture(18, SeedSpec(312, 2))
        st = ds.label_random_state(sigma, DEFAULT_EPSILON, seed=SeedSpec(313, 2))
        assert st.label == "SEP"
        assert st.gr <= DEFAULT_EPSILON

    def test_artificial_pptes_accept(self):
        rho = random_density_hs(9, SeedSpec(11, 16))
        st = ds.make_artificial_pptes(
            rho, DEFAULT_EPSILON, seed=SeedSpec(11, 17),
            recert_seed=SeedSpec(11, 18))
        assert st is not None
        assert st.label == "PPTES"
        assert st.origin == ds.ORIGIN_ARTIFICIAL
        assert is_ppt(st.rho)
        assert st.gr > DEFAULT_EPSILON

    def test_artificial_pptes_requires_npt(self):
        sigma = random_separable_mixture(12, SeedSpec(314, 0))
        with pytest.raises(PreconditionError):
            ds.make_artificial_pptes(sigma, DEFAULT_EPSILON, seed=SeedSpec(0, 0))

    def test_artificial_pptes_reject_is_logged(self):
        rho = random_density_hs(9, SeedSpec(11, 0))
        log: list[str] = []
        st = ds.make_artificial_pptes(
            rho, DEFAULT_EPSILON, seed=SeedSpec(11, 1),
            recert_seed=SeedSpec(11, 2), reject_log=log)
        assert st is None
        assert len(log) == 1


class TestFidelityStats:
    def test_two_states(self):
        a = random_density_hs(9, SeedSpec(50, 0))
        b = random_density_hs(9, SeedSpec(50, 1))
        stats = ds.fidelity_stats([labeled(a, "NPT"), labeled(b, "NPT")])
        expected = math.sqrt(fidelity(a, b, sqrt_rho=sqrtm_psd(a)))
        assert stats.sample == pytest.approx(expected, abs=1e-12)
        assert stats.per_class["NPT"] == pytest.approx(expected, abs=1e-12)
        assert stats.n_pairs == 1

    def test_per_class_uses_pairs_touching_the_class(self):
        states = [labeled(random_density_hs(9, SeedSpec(51, i)),
                          "SEP" if i < 2 else "NPT") for i in range(4)]
        roots = [sqrtm_psd(st.rho) for st in states]
        r = {}
        for i in range(4):
            for j in range(i + 1, 4):
                r[i, j] = math.sqrt(fidelity(states[i].rho, states[j].rho,
                                             sqrt_rho=roots[i]))
        stats = ds.fidelity_stats(states)
        assert stats.n_pairs == 6
        assert stats.sample == pytest.approx(sum(r.values()) / 6, abs=1e-12)
        # pairs touching SEP: every pair except the NPT-NPT one
        sep_pairs = [v for (i, j), v in r.items() if i < 2 or j < 2]
        assert stats.per_class["SEP"] == pytest.approx(
            sum(sep_pairs) / len(sep_pairs), abs=1e-12)

    def test_needs_two_states(self):
        with pytest.raises(PreconditionError):
            ds.fidelity_stats([labeled(random_density_hs(9, SeedSpec(52, 0)), "SEP")])


class TestGenerationPreconditions:
    def test_invalid_arguments(self):
        with pytest.raises(PreconditionError):
            ds.generate_balanced(0)
        with pytest.raises(PreconditionError):
            ds.generate_balanced(1, artificial_fraction=1.5)
        with pytest.raises(PreconditionError):
            ds.generate_balanced(1, workers=0)


class TestRowsIO:
    def make_rows(self, n=6):
        rows = []
        for i in range(n):
            rho = random_density_hs(9, SeedSpec(60, i))
            rows.append(ds.FeatureRow(features=encode(rho),
                                      label=ds.LABELS[i % 3],
                                      gr=0.01 * i))
        return rows

    def test_rows_from_states_encodes_tomograms(self):
        rho = random_density_hs(9, SeedSpec(61, 0))
        rows = ds.rows_from_states([labeled(rho, "NPT", gr=0.25)])
        assert rows[0].features.shape == (80,)
        assert np.array_equal(rows[0].features, encode(rho))
        assert rows[0].label == "NPT"
        assert rows[0].gr == 0.25

    def test_roundtrip_is_exact_and_stable(self, tmp_path):
        rows = self.make_rows()
        path = tmp_path / "rows.csv"
        ds.save_rows(rows, path)
        back = ds.load_rows(path)
        assert len(back) == len(rows)
        for a, b in zip(rows, back):
            assert np.array_equal(a.features, b.features)
            assert a.label == b.label and a.gr == b.gr
        first = path.read_bytes()
        ds.save_rows(back, path)
        assert path.read_bytes() == first

    def test_empty_rows_rejected(self, tmp_path):
        with pytest.raises(PreconditionError):
            ds.save_rows([], tmp_path / "rows.csv")

    def test_dataset_roundtrip_with_manifest(self, tmp_path):
        rows = self.make_rows()
        manifest = ds.DatasetManifest(
            format_version=1, epsilon=1e-5, master_seed=7, target_per_class=2,
            artificial_fraction=0.5, counts={"SEP": 2, "PPTES": 2, "NPT": 2},
            pptes_random=1, pptes_artificial=1, raw_draws=123, ppt_found=4,
            ppt_fraction=4 / 123, artificial_attempts=5,
            rejections={"artificial": 3}, partial=False,
            fidelity_sample=0.78, fidelity_per_class={"SEP": 0.79})
        ds.save_dataset(rows, manifest, tmp_path, rejections=["index=3 artificial: x"])
        back_rows, back_manifest = ds.load_dataset(tmp_path)
        assert back_manifest == manifest
        assert len(back_rows) == len(rows)
        assert (tmp_path / ds.REJECTIONS_LOG).read_text().startswith("index=3")

    def test_manifest_text_roundtrip(self):
        manifest = ds.DatasetManifest(
            format_version=1, epsilon=1e-5, master_seed=0, target_per_class=3,
            artificial_fraction=1.0, counts={"SEP": 3, "PPTES": 3, "NPT": 3},
            pptes_random=0, pptes_artificial=3, raw_draws=10, ppt_found=1,
            ppt_fraction=0.1, artificial_attempts=9, rejections={},
            partial=True, fidelity_sample=float("nan"), fidelity_per_class={})
        back = ds.manifest_from_text(ds.manifest_to_text(manifest))
        assert math.isnan(back.fidelity_sample)
        assert back.partial is True
        assert back.counts == manifest.counts
        assert back.rejections == {}


class TestVerifyRows:
    def test_clean_rows_pass(self):
        sigma = random_separable_mixture(18, SeedSpec(312, 2))
        rho = random_density_hs(9, SeedSpec(11, 16))
        rows = [
            ds.FeatureRow(features=encode(sigma), label="SEP", gr=2e-9),
            ds.FeatureRow(features=encode(rho), label="NPT", gr=0.3),
        ]
        assert ds.verify_rows(rows, DEFAULT_EPSILON) == []

    def test_label_ppt_mismatch_is_reported(self):
        sigma = random_separable_mixture(18, SeedSpec(312, 2))
        rows = [ds.FeatureRow(features=encode(sigma), label="NPT", gr=0.3)]
        problems = ds.verify_rows(rows, DEFAULT_EPSILON)
        assert len(problems) == 1 and "row 1" in problems[0]

    def test_gr_on_wrong_side_is_reported(self):
        sigma = random_separable_mixture(18, SeedSpec(312, 2))
        rows = [ds.FeatureRow(features=encode(sigma), label="SEP", gr=0.2)]
        problems = ds.verify_rows(rows, DEFAULT_EPSILON)
        assert len(problems) == 1 and "epsilon" in problems[0]


class TestFeatures:
    def test_expansion_layout(self):
        c = np.arange(1.0, 81.0).reshape(1, 80) / 100.0
        x = expand = ds.expand_features(c)
        assert expand.shape == (1, ds.EXPANDED_WIDTH)
        assert np.array_equal(x[0, :80], c[0])
        assert np.allclose(x[0, 80:160], np.exp(c[0]), atol=0, rtol=1e-15)
        assert x[0, 160] == pytest.approx(c[0, 0] * c[0, 0], abs=0)
        assert x[0, -1] == pytest.approx(c[0, 79] * c[0, 79], abs=0)

    def test_featurize_standardizes_training_columns(self):
        rows = np.vstack([encode(random_density_hs(9, SeedSpec(62, i)))
                          for i in range(12)])
        x, scaler = ds.featurize(rows)
        assert x.shape == (12, 3400)
        assert np.max(np.abs(x.mean(axis=0))) <= 1e-10
        live = scaler.scale != 1.0
        assert np.max(np.abs(x[:, live].std(axis=0) - 1.0)) <= 1e-9

    def test_scaler_reuses_training_statistics(self):
        train = np.vstack([encode(random_density_hs(9, SeedSpec(63, i)))
                           for i in range(8)])
        test = np.vstack([encode(random_density_hs(9, SeedSpec(64, i)))
                          for i in range(4)])
        x_train, scaler = ds.featurize(train)
        assert np.array_equal(scaler.transform(train), x_train)
        x_test = scaler.transform(test)
        # test columns keep a training-relative offset: rescaling them to
        # zero mean would need the test statistics, which must not leak
        assert np.max(np.abs(x_test.mean(axis=0))) > 1e-3
        refit, _ = ds.featurize(test)
        assert not np.allclose(refit, x_test)

    def test_zero_variance_column_passes_through(self):
        rows = np.ones((5, 80)) * 0.3
        x, scaler = ds.featurize(rows, expand=False)
        assert np.all(x == 0.0)
        assert np.all(scaler.scale == 1.0)


class TestSplit:
    def make_rows(self):
        rows = []
        for i in range(30):
            rho = random_density_hs(9, SeedSpec(65, i))
            rows.append(ds.FeatureRow(features=encode(rho),
                                      label=ds.LABELS[i % 3], gr=0.0))
        return rows

    def test_stratified_counts_and_disjointness(self):
        rows = self.make_rows()
        train, test = ds.split(rows, 0.8, seed=SeedSpec(66, 0))
        assert len(train) == 24 and len(test) == 6
        for label in ds.LABELS:
            assert sum(r.label == label for r in train) == 8
            assert sum(r.label == label for r in test) == 2
        ids = {id(r) for r in rows}
        assert {id(r) for r in train} | {id(r) for r in test} == ids
        assert {id(r) for r in train} & {id(r) for r in test} == set()

    def test_deterministic_and_seed_sensitive(self):
        rows = self.make_rows()
        t1, s1 = ds.split(rows, 0.7, seed=SeedSpec(67, 0))
        t2, s2 = ds.split(rows, 0.7, seed=SeedSpec(67, 0))
        assert [id(r) for r in t1] == [id(r) for r in t2]
        assert [id(r) for r in s1] == [id(r) for r in s2]
        t3, _ = ds.split(rows, 0.7, seed=SeedSpec(67, 1))
        assert [id(r) for r in t1] != [id(r) for r in t3]

    def test_small_class_never_empties(self):
        rows = self.make_rows()[:6]
        train, test = ds.split(rows, 0.9, seed=SeedSpec(68, 0))
        for label in ds.LABELS:
            assert sum(r.label == label for r in train) >= 1
            assert sum(r.label == label for r in test) >= 1

    def test_tiny_class_rejected(self):
        rows = self.make_rows()[:1]
        with pytest.raises(PreconditionError):
            ds.split(rows, 0.5)
