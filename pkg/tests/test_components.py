import math

import pytest

from core.components import (Catalog, ComponentKind, ComponentSpec, FiberBand, PathChain, RqiProfile,
                             chain_transmittance, db_to_transmittance, make_wss,
                             nir_vs_telecom_excess_loss, transmittance_to_db, wss_loss)
from core.exceptions import ConfigError, DomainError


def test_db_to_transmittance():
    assert db_to_transmittance(0) == 1.0
    assert db_to_transmittance(10) == pytest.approx(0.1, rel=1e-12)
    assert db_to_transmittance(0.35) == pytest.approx(10 ** -0.035, rel=1e-12)
    assert db_to_transmittance(0.35) == pytest.approx(0.9226, abs=1e-4)


def test_negative_loss_rejected():
    with pytest.raises(DomainError):
        db_to_transmittance(-0.1)


@pytest.mark.parametrize("loss", [0.0, 0.137, 0.35, 2.0, 19.15])
def test_db_round_trip(loss):
    assert transmittance_to_db(db_to_transmittance(loss)) == pytest.approx(loss, rel=1e-12, abs=1e-15)


class TestCatalog:

    def test_defaults(self, catalog):
        assert catalog.p_emit == 0.5
        assert catalog.get("collection_optics").transmittance == pytest.approx(0.96, rel=1e-12)
        assert catalog.get("smf_coupling").transmittance == pytest.approx(0.9, rel=1e-12)
        assert catalog.get("fiber_telecom").insertion_loss_db == 0.17
        assert catalog.get("fiber_nir").insertion_loss_db == 4.0
        assert catalog.get("mechanical_switch").insertion_loss_db == 0.35
        assert catalog.get("mechanical_switch_worst").insertion_loss_db == 0.7
        assert catalog.get("photonic_switch").insertion_loss_db == 2.0
        assert catalog.get("dwdm_mux").insertion_loss_db == 0.5
        assert catalog.get("dwdm_mux_grating").insertion_loss_db == 0.137
        assert catalog.get("detector").transmittance == pytest.approx(0.95, rel=1e-12)
        assert catalog.get("rqi_converter").transmittance == 1.0
        assert catalog.get("chip_coupling").transmittance == pytest.approx(0.97, rel=1e-12)
        assert catalog.get("fp_filter").transmittance == pytest.approx(0.95, rel=1e-12)
        assert catalog.get("photonic_switch").crosstalk_db == 25.0
        assert catalog.get("mechanical_switch").crosstalk_db == 60.0
        assert catalog.get("rqi_converter").reconfig_latency_s == 1e-9
        assert catalog.get("mechanical_switch").reconfig_latency_s == 1e-3

    def test_every_entry_has_provenance(self, catalog):
        assert all(spec.provenance for spec in catalog.entries.values())

    def test_missing_entry(self, catalog):
        with pytest.raises(ConfigError):
            catalog.get("no_such_switch")

    def test_bad_kind(self):
        with pytest.raises(ConfigError):
            Catalog.from_dict({"components": {"x": {"kind": "Teleporter"}}})

    def test_override(self, catalog):
        worst = catalog.with_overrides(mechanical_switch="mechanical_switch_worst")
        assert worst.get("mechanical_switch").insertion_loss_db == 0.7
        assert catalog.get("mechanical_switch").insertion_loss_db == 0.35

    def test_photonic_switch_is_the_only_photonic_entry(self, catalog):
        photonic = [name for name, spec in catalog.entries.items()
                    if spec.kind is ComponentKind.PHOTONIC_SWITCH]
        assert photonic == ["photonic_switch"]


class TestChains:

    def test_empty(self):
        assert chain_transmittance(PathChain()) == 1.0

    def test_nir_fiber(self, catalog):
        chain = PathChain((catalog.fiber(FiberBand.NIR, 5.0),))
        assert chain_transmittance(chain) == pytest.approx(0.01, rel=1e-12)

    def test_emission_and_detection(self, catalog):
        chain = PathChain((catalog.get("collection_optics"), catalog.get("smf_coupling"),
                           catalog.get("detector")))
        assert chain_transmittance(chain) == pytest.approx(0.8208, rel=1e-12)

    def test_concatenation_is_multiplicative(self, catalog):
        a = PathChain((catalog.get("dwdm_mux"), catalog.fiber(FiberBand.TELECOM, 2.0)))
        b = PathChain((catalog.get("mechanical_switch"), catalog.get("detector")))
        assert chain_transmittance(a + b) == pytest.approx(
            chain_transmittance(a) * chain_transmittance(b), rel=1e-12)
        assert (a + b).names()[0] == "dwdm_mux"

    def test_monotone_when_appending(self, catalog):
        chain = PathChain()
        last = 1.0
        for name in ("collection_optics", "chip_coupling", "photonic_switch", "chip_coupling", "detector"):
            chain = chain.append(catalog.get(name))
            value = chain_transmittance(chain)
            assert value <= last
            last = value


def test_excess_loss(catalog):
    assert nir_vs_telecom_excess_loss(5, catalog) == pytest.approx(19.15, abs=1e-12)
    assert nir_vs_telecom_excess_loss(0, catalog) == 0
    assert nir_vs_telecom_excess_loss(1, catalog) == pytest.approx(3.83, abs=1e-12)


def test_wss_loss(catalog):
    standard = wss_loss(catalog.get("dwdm_demux"), catalog.get("mechanical_switch"), catalog.get("dwdm_mux"))
    assert standard == pytest.approx(1.35, abs=1e-12)
    assert standard <= 1.5
    grating = wss_loss(catalog.get("dwdm_demux_grating"), catalog.get("mechanical_switch"),
                       catalog.get("dwdm_mux_grating"))
    assert grating == pytest.approx(0.624, abs=1e-12)
    assert grating <= 0.7
    zero = ComponentSpec("z", ComponentKind.DWDM_MUX)
    assert wss_loss(zero, zero, zero) == 0


def test_make_wss(catalog):
    wss = make_wss(catalog.get("dwdm_demux"), catalog.get("mechanical_switch"), catalog.get("dwdm_mux"))
    assert wss.kind is ComponentKind.WSS
    assert wss.reconfig_latency_s == 1e-3
    assert wss.crosstalk_db == 60.0


def test_component_invariants():
    with pytest.raises(DomainError):
        ComponentSpec("bad", ComponentKind.DETECTOR, insertion_loss_db=-1)
    with pytest.raises(DomainError):
        ComponentSpec("bad", ComponentKind.PHOTONIC_SWITCH, crosstalk_db=0)
    assert math.isinf(ComponentSpec("ok", ComponentKind.DETECTOR).crosstalk_db)


class TestConverterProfiles:

    def test_tdfg_defaults(self, catalog):
        tdfg = catalog.converter("Chi3_TDFG")
        assert tdfg.conversion_efficiency == 0.9
        assert tdfg.pump_nm == 3140.0
        assert tdfg.pump_power_w == pytest.approx(0.046)
        assert tdfg.overcoupling == 20.0
        assert tdfg.temporal_mode
        assert tdfg.efficiency == pytest.approx(0.9)

    def test_every_converter_has_provenance(self, catalog):
        assert set(catalog.converters) == {"Chi2_DFG", "Chi3_FWM_BG", "Chi3_TDFG", "None"}
        assert all(p.provenance for p in catalog.converters.values())

    def test_temporal_mode_efficiency(self):
        shaped = RqiProfile("x", conversion_efficiency=0.9, temporal_mode=True,
                            temporal_mode_efficiency=0.8, mode_overlap=0.5)
        assert shaped.efficiency == pytest.approx(0.72, rel=1e-12)
        unshaped = RqiProfile("x", conversion_efficiency=0.9, temporal_mode=False,
                              temporal_mode_efficiency=0.8, mode_overlap=0.5)
        assert unshaped.efficiency == pytest.approx(0.45, rel=1e-12)

    @pytest.mark.parametrize("field", ["conversion_efficiency", "temporal_mode_efficiency", "mode_overlap"])
    @pytest.mark.parametrize("value", [0.0, 1.2])
    def test_efficiency_range(self, field, value):
        with pytest.raises(DomainError):
            RqiProfile("x", **{field: value})

    def test_unknown_field(self):
        with pytest.raises(ConfigError):
            Catalog.from_dict({"components": {}, "converters": {"Chi2_DFG": {"gain": 2.0}}})

    def test_with_converter_sets_rqi_loss(self, catalog):
        tdfg = catalog.with_converter("Chi3_TDFG")
        assert tdfg.get("rqi_converter").transmittance == pytest.approx(0.9, rel=1e-12)
        assert tdfg.get("rqi_converter").reconfig_latency_s == 1e-9
        assert tdfg.get("qfc_converter").transmittance == 1.0
        assert catalog.get("rqi_converter").transmittance == 1.0

    def test_unknown_converter(self, catalog):
        with pytest.raises(ConfigError):
            catalog.with_converter("Chi5")
