import pytest

from core.exceptions import ConfigError, DomainError
from core.fidelity import (FIDELITY_COLUMNS, ConverterKind, ConverterProfile, FidelityParams,
                           NoiseContribution, NoiseSource, PairFidelityModel, architecture_model,
                           converter_profiles, crossover_nodes, fidelity_vs_nodes,
                           infidelity_from_crosstalk, pair_fidelity, snr_to_infidelity)

ARCHS = ("NoQfcSingle", "QfcSingle", "RqiDwdm")


@pytest.fixture(scope="module")
def params(catalog):
    section = {
        "mux_crosstalk_db": 60.0,
        "rqi_converter": "Chi2_DFG",
        "converters": {"Chi2_DFG": {"infidelity": 0.0275}, "Chi3_FWM_BG": {"infidelity": 0.01}},
    }
    return FidelityParams.from_config(section, catalog)


def test_crosstalk_conversion():
    assert infidelity_from_crosstalk(25.0) == pytest.approx(10 ** -2.5)
    assert infidelity_from_crosstalk(60.0) == pytest.approx(1e-6)
    assert infidelity_from_crosstalk(float("inf")) == 0.0
    with pytest.raises(DomainError):
        infidelity_from_crosstalk(0.0)


def test_snr():
    assert snr_to_infidelity(99.0, 1.0) == pytest.approx(0.01)
    assert snr_to_infidelity(10.0, 0.0) == 0.0
    with pytest.raises(DomainError):
        snr_to_infidelity(0.0, 0.0)


class TestPairFidelity:

    def test_no_noise(self):
        assert pair_fidelity(PairFidelityModel()) == 1.0

    def test_product(self):
        model = PairFidelityModel(source_fidelity=0.99)
        model = model.append(NoiseContribution(NoiseSource.SWITCH_CROSSTALK, 0.1))
        model = model.append(NoiseContribution(NoiseSource.CONVERTER_NOISE, 0.2), photon="b")
        assert pair_fidelity(model) == pytest.approx(0.99 * 0.9 * 0.8)

    def test_order_independent(self):
        a = NoiseContribution(NoiseSource.SWITCH_CROSSTALK, 0.1)
        b = NoiseContribution(NoiseSource.MUX_CROSSTALK, 0.03)
        assert pair_fidelity(PairFidelityModel((a, b))) == pytest.approx(
            pair_fidelity(PairFidelityModel((b, a))))

    def test_total_loss_of_fidelity(self):
        model = PairFidelityModel((NoiseContribution(NoiseSource.CONVERTER_NOISE, 1.0),))
        assert pair_fidelity(model) == 0.0

    @pytest.mark.parametrize("value", [-0.1, 1.1])
    def test_infidelity_range(self, value):
        with pytest.raises(DomainError):
            NoiseContribution(NoiseSource.SWITCH_CROSSTALK, value)

    def test_source_fidelity_range(self):
        with pytest.raises(DomainError):
            PairFidelityModel(source_fidelity=1.5)


class TestConverters:

    def test_tdfg_is_noiseless(self):
        with pytest.raises(DomainError):
            ConverterProfile(ConverterKind.CHI3_TDFG, 0.01)

    def test_from_counts(self):
        profile = ConverterProfile.from_counts(ConverterKind.CHI3_FWM_BG, 95.0, 5.0)
        assert profile.infidelity == pytest.approx(0.05)
        assert profile.contribution().source is NoiseSource.CONVERTER_NOISE

    def test_unconfigured_kinds_are_noiseless(self):
        profiles = converter_profiles({"Chi2_DFG": {"infidelity": 0.0275}})
        assert profiles[ConverterKind.CHI2_DFG].infidelity == 0.0275
        assert profiles[ConverterKind.CHI3_TDFG].infidelity == 0.0

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            converter_profiles({"Chi5": {"infidelity": 0.1}})

    def test_tdfg_noise_rejected_as_config(self):
        with pytest.raises(ConfigError):
            converter_profiles({"Chi3_TDFG": {"infidelity": 0.02}})

    def test_counts_entry(self):
        profiles = converter_profiles({"Chi2_DFG": {"noise_counts": 50, "signal_counts": 950}})
        assert profiles[ConverterKind.CHI2_DFG].infidelity == pytest.approx(0.05)
        assert profiles[ConverterKind.CHI2_DFG].noise_counts == 50

    @pytest.mark.parametrize("entry", [
        {"noise_counts": 50},
        {"signal_counts": 950},
        {"infidelity": 0.05, "noise_counts": 50, "signal_counts": 950},
        {"noise_counts": 0, "signal_counts": 0},
    ])
    def test_bad_counts_entry(self, entry):
        with pytest.raises(ConfigError):
            converter_profiles({"Chi2_DFG": entry})

    def test_from_noise_density(self):
        profile = ConverterProfile.from_noise_density(ConverterKind.CHI2_DFG, 1e6, 1e-4, 0.5, 950.0)
        assert profile.noise_counts == pytest.approx(50.0)
        assert profile.infidelity == pytest.approx(0.05)

    def test_noise_density_scales_with_bandwidth(self):
        narrow = ConverterProfile.from_noise_density(ConverterKind.CHI2_DFG, 1e6, 1e-4, 1.0, 1e9)
        wide = ConverterProfile.from_noise_density(ConverterKind.CHI2_DFG, 1e6, 2e-4, 1.0, 1e9)
        assert wide.noise_counts == pytest.approx(2 * narrow.noise_counts, rel=1e-12)
        assert wide.infidelity > narrow.infidelity

    def test_chi2_profile_overrides_config(self, catalog):
        section = {"converters": {"Chi2_DFG": {"infidelity": 0.0275}}}
        override = ConverterProfile(ConverterKind.CHI2_DFG, 0.01)
        params = FidelityParams.from_config(section, catalog, chi2_profile=override)
        assert params.qfc_converter.infidelity == 0.01
        assert params.rqi_converter.infidelity == 0.01
        tdfg = FidelityParams.from_config(section, catalog, rqi_kind="Chi3_TDFG", chi2_profile=override)
        assert tdfg.qfc_converter.infidelity == 0.01
        assert tdfg.rqi_converter.infidelity == 0.0


class TestArchitectures:

    def test_params_from_catalog(self, params):
        assert params.photonic_crosstalk_db == 25.0
        assert params.mechanical_crosstalk_db == 60.0
        assert params.rqi_converter.kind is ConverterKind.CHI2_DFG

    @pytest.mark.parametrize("nodes", [1, 3, 9])
    def test_closed_forms(self, params, nodes):
        eps = 10 ** -2.5
        assert pair_fidelity(architecture_model("NoQfcSingle", nodes, params)) == pytest.approx(
            (1 - eps) ** (2 * nodes))
        assert pair_fidelity(architecture_model("QfcSingle", nodes, params)) == pytest.approx(
            (1 - 0.0275) ** 2 * (1 - eps) ** (2 * nodes))
        assert pair_fidelity(architecture_model("RqiDwdm", nodes, params)) == pytest.approx(
            (1 - 0.0275) ** 2 * (1 - 1e-6) ** (6 * nodes))

    @pytest.mark.parametrize("nodes, targets", [
        (3, {"NoQfcSingle": 0.987, "QfcSingle": 0.938, "RqiDwdm": 0.946}),
        (9, {"QfcSingle": 0.878, "RqiDwdm": 0.926}),
    ])
    def test_reference_values(self, params, nodes, targets):
        for arch, target in targets.items():
            assert pair_fidelity(architecture_model(arch, nodes, params)) == pytest.approx(target, abs=0.02)

    def test_monotone_in_nodes(self, params):
        for arch in ARCHS:
            values = fidelity_vs_nodes(arch, range(1, 21), params)["fidelity"].tolist()
            assert values == sorted(values, reverse=True)

    def test_rqi_flat_over_network(self, params):
        df = fidelity_vs_nodes("RqiDwdm", [1, 20], params)
        assert df["fidelity"].iloc[0] - df["fidelity"].iloc[1] < 1e-3

    def test_tdfg_rqi_is_near_perfect(self, catalog):
        params = FidelityParams.from_config({}, catalog, rqi_kind="Chi3_TDFG")
        assert pair_fidelity(architecture_model("RqiDwdm", 9, params)) > 0.9999

    def test_invalid_inputs(self, params):
        with pytest.raises(DomainError):
            architecture_model("RqiDwdm", 0, params)
        with pytest.raises(DomainError):
            architecture_model("Teleporter", 3, params)

    def test_curve_columns(self, params):
        df = fidelity_vs_nodes("NoQfcSingle", [1, 2], params)
        assert list(df.columns) == FIDELITY_COLUMNS
        assert df["converter_kind"].tolist() == ["None", "None"]


class TestCrossover:

    def test_against_photonic_baseline(self, params):
        n_star = crossover_nodes(params)
        assert n_star == 9
        at = {a: pair_fidelity(architecture_model(a, n_star, params)) for a in ("RqiDwdm", "NoQfcSingle")}
        before = {a: pair_fidelity(architecture_model(a, n_star - 1, params)) for a in ("RqiDwdm", "NoQfcSingle")}
        assert at["RqiDwdm"] >= at["NoQfcSingle"]
        assert before["RqiDwdm"] < before["NoQfcSingle"]

    def test_against_qfc_baseline(self, params):
        assert crossover_nodes(params, baseline="QfcSingle") == 1

    def test_never_crosses(self):
        params = FidelityParams(photonic_crosstalk_db=80.0, mechanical_crosstalk_db=60.0)
        assert crossover_nodes(params, max_nodes=50) is None


def test_zero_noise_is_perfect():
    inf = float("inf")
    params = FidelityParams(photonic_crosstalk_db=inf, mechanical_crosstalk_db=inf, mux_crosstalk_db=inf,
                            qfc_converter=ConverterProfile(ConverterKind.CHI2_DFG),
                            rqi_converter=ConverterProfile(ConverterKind.CHI2_DFG))
    for arch in ARCHS:
        assert (fidelity_vs_nodes(arch, range(1, 10), params)["fidelity"] == 1.0).all()


def test_tdfg_curve_dominates_dfg(params, catalog):
    tdfg = FidelityParams.from_config({"converters": {"Chi2_DFG": {"infidelity": 0.0275}}},
                                      catalog, rqi_kind="Chi3_TDFG")
    nodes = range(1, 21)
    dfg_curve = fidelity_vs_nodes("RqiDwdm", nodes, params)["fidelity"]
    tdfg_curve = fidelity_vs_nodes("RqiDwdm", nodes, tdfg)["fidelity"]
    assert (tdfg_curve >= dfg_curve).all()
