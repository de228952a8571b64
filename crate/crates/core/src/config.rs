//! Fabric configuration: every geometric, electrical and thermal constant of
//! a fabric instance, plus the `key = value` file format it is read from.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
}

/// Reference 2D CMOS figures for one benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaselineEntry {
    pub throughput_ops_s: f64,
    pub power_uw: f64,
    pub density_per_mm2: f64,
}

impl BaselineEntry {
    pub fn perf_per_watt(&self) -> f64 {
        self.throughput_ops_s / (self.power_uw * 1e-6)
    }
}

/// Per-resource routing costs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResourceCosts {
    pub bridge: f64,
    pub coax: f64,
    pub seg: f64,
    pub sbilc: f64,
}

impl Default for ResourceCosts {
    fn default() -> Self {
        Self {
            bridge: 1.0,
            coax: 1.0,
            seg: 1.0,
            sbilc: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FabricConfig {
    pub pitch_nm: f64,
    pub grid_cols_x: usize,
    pub grid_cols_y: usize,
    pub gate_levels_per_wire: usize,
    pub segments_per_gate_level: usize,
    pub coax_shells: usize,
    pub vdd_v: f64,
    pub rwl_read_v: f64,
    pub wwl_write_v: f64,
    pub ion_n_ua: f64,
    pub ion_p_ua: f64,
    pub on_off_ratio: f64,
    pub gate_cap_ff: f64,
    pub wire_r_ohm_per_um: f64,
    pub wire_c_ff_per_um: f64,
    pub k_nanowire_w_mk: f64,
    pub k_bridge_w_mk: f64,
    pub r_hej_k_per_w: f64,
    pub r_hdpp_k_per_w: f64,
    pub ambient_k: f64,
    pub cmos_baseline: BTreeMap<String, BaselineEntry>,

    /// Vertical pitch of one segment slot.
    pub segment_pitch_nm: f64,
    /// Nanowire diameter; also the width of Bridges.
    pub nanowire_diameter_nm: f64,
    /// Nanowire length between the lowest gate level and the bulk substrate.
    pub nanowire_base_nm: f64,
    /// SRAM read word-line must lie in (0, frac * vdd].
    pub sram_read_max_frac: f64,
    /// SRAM write word-line must lie in [frac * vdd, vdd].
    pub sram_write_min_frac: f64,
    pub cost: ResourceCosts,
    /// Spacing of the heat-dissipating pillar lattice, in columns.
    pub hdpp_spacing: usize,
    pub activity: f64,
    /// Fraction of logic slots the compiler fills when sizing a grid.
    pub placement_utilization: f64,
}

impl Default for FabricConfig {
    fn default() -> Self {
        let mut cmos_baseline = BTreeMap::new();
        cmos_baseline.insert(
            "mult4".to_string(),
            BaselineEntry {
                throughput_ops_s: 4.97e9,
                power_uw: 172.0,
                density_per_mm2: 2e4,
            },
        );
        cmos_baseline.insert(
            "mult16".to_string(),
            BaselineEntry {
                throughput_ops_s: 4.48e9,
                power_uw: 1.26e4,
                density_per_mm2: 6.94e2,
            },
        );
        cmos_baseline.insert(
            "wisp4".to_string(),
            BaselineEntry {
                throughput_ops_s: 4.31e9,
                power_uw: 886.0,
                density_per_mm2: 3.46e3,
            },
        );
        Self {
            pitch_nm: 145.0,
            grid_cols_x: 64,
            grid_cols_y: 64,
            gate_levels_per_wire: 2,
            segments_per_gate_level: 10,
            coax_shells: 2,
            vdd_v: 1.2,
            rwl_read_v: 0.1,
            wwl_write_v: 1.2,
            ion_n_ua: 17.0,
            ion_p_ua: 16.0,
            on_off_ratio: 1e5,
            gate_cap_ff: 0.005,
            wire_r_ohm_per_um: 100.0,
            wire_c_ff_per_um: 0.03,
            k_nanowire_w_mk: 10.0,
            k_bridge_w_mk: 150.0,
            r_hej_k_per_w: 1e6,
            r_hdpp_k_per_w: 1e6,
            ambient_k: 300.0,
            cmos_baseline,
            segment_pitch_nm: 20.0,
            nanowire_diameter_nm: 20.0,
            nanowire_base_nm: 155.0,
            sram_read_max_frac: 0.3,
            sram_write_min_frac: 0.9,
            cost: ResourceCosts::default(),
            hdpp_spacing: 3,
            activity: 0.1,
            placement_utilization: 0.9,
        }
    }
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    value.parse::<f64>().map_err(|_| ConfigError::Syntax {
        line,
        message: format!("`{key}` expects a number, got `{value}`"),
    })
}

fn parse_usize(line: usize, key: &str, value: &str) -> Result<usize, ConfigError> {
    value.parse::<usize>().map_err(|_| ConfigError::Syntax {
        line,
        message: format!("`{key}` expects a non-negative integer, got `{value}`"),
    })
}

impl FabricConfig {
    /// Parses a configuration file. Keys not present keep their default value.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = FabricConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                message: "expected `key = value`".to_string(),
            })?;
            cfg.set(line, key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, line: usize, key: &str, value: &str) -> Result<(), ConfigError> {
        macro_rules! float {
            ($field:expr) => {{
                $field = parse_f64(line, key, value)?;
            }};
        }
        macro_rules! int {
            ($field:expr) => {{
                $field = parse_usize(line, key, value)?;
            }};
        }
        match key {
            "pitch_nm" => float!(self.pitch_nm),
            "grid_cols_x" => int!(self.grid_cols_x),
            "grid_cols_y" => int!(self.grid_cols_y),
            "gate_levels_per_wire" => int!(self.gate_levels_per_wire),
            "segments_per_gate_level" => int!(self.segments_per_gate_level),
            "coax_shells" => int!(self.coax_shells),
            "vdd_v" => float!(self.vdd_v),
            "rwl_read_v" => float!(self.rwl_read_v),
            "wwl_write_v" => float!(self.wwl_write_v),
            "ion_n_ua" => float!(self.ion_n_ua),
            "ion_p_ua" => float!(self.ion_p_ua),
            "on_off_ratio" => float!(self.on_off_ratio),
            "gate_cap_ff" => float!(self.gate_cap_ff),
            "wire_r_ohm_per_um" => float!(self.wire_r_ohm_per_um),
            "wire_c_ff_per_um" => float!(self.wire_c_ff_per_um),
            "k_nanowire_w_mk" => float!(self.k_nanowire_w_mk),
            "k_bridge_w_mk" => float!(self.k_bridge_w_mk),
            "r_hej_k_per_w" => float!(self.r_hej_k_per_w),
            "r_hdpp_k_per_w" => float!(self.r_hdpp_k_per_w),
            "ambient_k" => float!(self.ambient_k),
            "segment_pitch_nm" => float!(self.segment_pitch_nm),
            "nanowire_diameter_nm" => float!(self.nanowire_diameter_nm),
            "nanowire_base_nm" => float!(self.nanowire_base_nm),
            "sram_read_max_frac" => float!(self.sram_read_max_frac),
            "sram_write_min_frac" => float!(self.sram_write_min_frac),
            "cost_bridge" => float!(self.cost.bridge),
            "cost_coax" => float!(self.cost.coax),
            "cost_seg" => float!(self.cost.seg),
            "cost_sbilc" => float!(self.cost.sbilc),
            "hdpp_spacing" => int!(self.hdpp_spacing),
            "activity" => float!(self.activity),
            "placement_utilization" => float!(self.placement_utilization),
            _ => {
                // cmos_baseline.<bench>.<field>
                let parts: Vec<&str> = key.split('.').collect();
                if parts.len() == 3 && parts[0] == "cmos_baseline" {
                    let v = parse_f64(line, key, value)?;
                    let entry = self
                        .cmos_baseline
                        .entry(parts[1].to_string())
                        .or_insert(BaselineEntry {
                            throughput_ops_s: f64::NAN,
                            power_uw: f64::NAN,
                            density_per_mm2: f64::NAN,
                        });
                    match parts[2] {
                        "throughput_ops_s" => entry.throughput_ops_s = v,
                        "power_uw" => entry.power_uw = v,
                        "density_per_mm2" => entry.density_per_mm2 = v,
                        _ => {
                            return Err(ConfigError::UnknownKey {
                                line,
                                key: key.to_string(),
                            })
                        }
                    }
                } else {
                    return Err(ConfigError::UnknownKey {
                        line,
                        key: key.to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Checks every invariant; the error names the first offending key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |k: &str| Err(ConfigError::InvalidConfig(k.to_string()));
        let positive = [
            ("pitch_nm", self.pitch_nm),
            ("vdd_v", self.vdd_v),
            ("ion_n_ua", self.ion_n_ua),
            ("ion_p_ua", self.ion_p_ua),
            ("gate_cap_ff", self.gate_cap_ff),
            ("wire_r_ohm_per_um", self.wire_r_ohm_per_um),
            ("wire_c_ff_per_um", self.wire_c_ff_per_um),
            ("k_nanowire_w_mk", self.k_nanowire_w_mk),
            ("k_bridge_w_mk", self.k_bridge_w_mk),
            ("r_hej_k_per_w", self.r_hej_k_per_w),
            ("r_hdpp_k_per_w", self.r_hdpp_k_per_w),
            ("ambient_k", self.ambient_k),
            ("segment_pitch_nm", self.segment_pitch_nm),
            ("nanowire_diameter_nm", self.nanowire_diameter_nm),
            ("nanowire_base_nm", self.nanowire_base_nm),
            ("cost_bridge", self.cost.bridge),
            ("cost_coax", self.cost.coax),
            ("cost_seg", self.cost.seg),
            ("cost_sbilc", self.cost.sbilc),
            ("placement_utilization", self.placement_utilization),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(k);
            }
        }
        let counts = [
            ("grid_cols_x", self.grid_cols_x),
            ("grid_cols_y", self.grid_cols_y),
            ("gate_levels_per_wire", self.gate_levels_per_wire),
            ("segments_per_gate_level", self.segments_per_gate_level),
            ("hdpp_spacing", self.hdpp_spacing),
        ];
        for (k, v) in counts {
            if v < 1 {
                return bad(k);
            }
        }
        if self.wwl_write_v > self.vdd_v || !(self.wwl_write_v > 0.0) {
            return bad("wwl_write_v");
        }
        if !(self.rwl_read_v > 0.0 && self.rwl_read_v < self.wwl_write_v) {
            return bad("rwl_read_v");
        }
        if !(self.on_off_ratio >= 1.0) {
            return bad("on_off_ratio");
        }
        if !(self.sram_read_max_frac > 0.0 && self.sram_read_max_frac < self.sram_write_min_frac)
        {
            return bad("sram_read_max_frac");
        }
        if !(self.sram_write_min_frac <= 1.0) {
            return bad("sram_write_min_frac");
        }
        if !(self.activity >= 0.0 && self.activity <= 1.0) {
            return bad("activity");
        }
        if self.placement_utilization > 1.0 {
            return bad("placement_utilization");
        }
        for (name, e) in &self.cmos_baseline {
            for (field, v) in [
                ("throughput_ops_s", e.throughput_ops_s),
                ("power_uw", e.power_uw),
                ("density_per_mm2", e.density_per_mm2),
            ] {
                if !(v > 0.0 && v.is_finite()) {
                    return bad(&format!("cmos_baseline.{name}.{field}"));
                }
            }
        }
        Ok(())
    }

    /// Renders the configuration in the same `key = value` format `parse` reads.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("pitch_nm", self.pitch_nm.to_string());
        kv("grid_cols_x", self.grid_cols_x.to_string());
        kv("grid_cols_y", self.grid_cols_y.to_string());
        kv("gate_levels_per_wire", self.gate_levels_per_wire.to_string());
        kv("segments_per_gate_level", self.segments_per_gate_level.to_string());
        kv("coax_shells", self.coax_shells.to_string());
        kv("vdd_v", self.vdd_v.to_string());
        kv("rwl_read_v", self.rwl_read_v.to_string());
        kv("wwl_write_v", self.wwl_write_v.to_string());
        kv("ion_n_ua", self.ion_n_ua.to_string());
        kv("ion_p_ua", self.ion_p_ua.to_string());
        kv("on_off_ratio", self.on_off_ratio.to_string());
        kv("gate_cap_ff", self.gate_cap_ff.to_string());
        kv("wire_r_ohm_per_um", self.wire_r_ohm_per_um.to_string());
        kv("wire_c_ff_per_um", self.wire_c_ff_per_um.to_string());
        kv("k_nanowire_w_mk", self.k_nanowire_w_mk.to_string());
        kv("k_bridge_w_mk", self.k_bridge_w_mk.to_string());
        kv("r_hej_k_per_w", self.r_hej_k_per_w.to_string());
        kv("r_hdpp_k_per_w", self.r_hdpp_k_per_w.to_string());
        kv("ambient_k", self.ambient_k.to_string());
        kv("segment_pitch_nm", self.segment_pitch_nm.to_string());
        kv("nanowire_diameter_nm", self.nanowire_diameter_nm.to_string());
        kv("nanowire_base_nm", self.nanowire_base_nm.to_string());
        kv("sram_read_max_frac", self.sram_read_max_frac.to_string());
        kv("sram_write_min_frac", self.sram_write_min_frac.to_string());
        kv("cost_bridge", self.cost.bridge.to_string());
        kv("cost_coax", self.cost.coax.to_string());
        kv("cost_seg", self.cost.seg.to_string());
        kv("cost_sbilc", self.cost.sbilc.to_string());
        kv("hdpp_spacing", self.hdpp_spacing.to_string());
        kv("activity", self.activity.to_string());
        kv("placement_utilization", self.placement_utilization.to_string());
        for (name, e) in &self.cmos_baseline {
            kv(
                &format!("cmos_baseline.{name}.throughput_ops_s"),
                e.throughput_ops_s.to_string(),
            );
            kv(&format!("cmos_baseline.{name}.power_uw"), e.power_uw.to_string());
            kv(
                &format!("cmos_baseline.{name}.density_per_mm2"),
                e.density_per_mm2.to_string(),
            );
        }
        s
    }

    /// Height of one gate level, micrometers.
    pub fn level_height_um(&self) -> f64 {
        self.segments_per_gate_level as f64 * self.segment_pitch_nm * 1e-3
    }

    pub fn pitch_um(&self) -> f64 {
        self.pitch_nm * 1e-3
    }

    /// Doping boundary inside a level: segments `[0, b)` are n-type, `[b, S)` p-type.
    pub fn doping_boundary(&self) -> usize {
        self.segments_per_gate_level / 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        FabricConfig::default().validate().unwrap();
    }

    #[test]
    fn zero_columns_names_the_key() {
        let err = FabricConfig::parse("grid_cols_x = 0").unwrap_err();
        assert_eq!(err, ConfigError::InvalidConfig("grid_cols_x".into()));
    }

    #[test]
    fn unknown_key_is_an_error() {
        let err = FabricConfig::parse("# hello\npitch_nm = 40\nbogus = 1\n").unwrap_err();
        assert_eq!(
            err,
            ConfigError::UnknownKey {
                line: 3,
                key: "bogus".into()
            }
        );
    }

    #[test]
    fn read_level_must_stay_below_write_level() {
        let err = FabricConfig::parse("rwl_read_v = 1.3").unwrap_err();
        assert_eq!(err, ConfigError::InvalidConfig("rwl_read_v".into()));
        let err = FabricConfig::parse("wwl_write_v = 1.5").unwrap_err();
        assert_eq!(err, ConfigError::InvalidConfig("wwl_write_v".into()));
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = FabricConfig::default();
        cfg.pitch_nm = 45.0;
        cfg.coax_shells = 0;
        cfg.cost.sbilc = 3.5;
        let back = FabricConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn baseline_entries_parse() {
        let cfg = FabricConfig::parse(
            "cmos_baseline.toy.throughput_ops_s = 1e9\n\
             cmos_baseline.toy.power_uw = 10\n\
             cmos_baseline.toy.density_per_mm2 = 5",
        )
        .unwrap();
        let e = cfg.cmos_baseline["toy"];
        assert_eq!(e.power_uw, 10.0);
        assert!((e.perf_per_watt() - 1e14).abs() < 1.0);
        let err = FabricConfig::parse("cmos_baseline.half.power_uw = 10").unwrap_err();
        assert!(matches!(err, ConfigError::InvalidConfig(k) if k.starts_with("cmos_baseline.half")));
    }
}
