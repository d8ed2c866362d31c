use proptest::prelude::*;

use edge_goal_sim::config::{Fading, MehFile};
use edge_goal_sim::inference::SyntheticOracleParams;
use edge_goal_sim::{InferenceMode, OracleConfig, ScenarioFile};

/// Decimal literals with at most 15 significant digits.
fn decimal() -> impl Strategy<Value = f64> {
    (1u64..999_999_999_999_999, -20i32..20).prop_map(|(m, e)| format!("{m}e{e}").parse().unwrap())
}

fn meh() -> impl Strategy<Value = MehFile> {
    (decimal(), decimal(), decimal(), decimal(), any::<bool>(), decimal()).prop_map(
        |(f_max_ghz, kappa, alpha, beta_max, beta_deterministic, workload_cycles)| MehFile {
            f_max_ghz,
            kappa,
            alpha,
            beta_max,
            beta_deterministic,
            workload_cycles,
        },
    )
}

fn scenario() -> impl Strategy<Value = ScenarioFile> {
    (
        prop::array::uniform8(decimal()),
        any::<u64>(),
        prop::option::of(decimal()),
        meh(),
        prop::option::of(meh()),
        (decimal(), decimal(), any::<bool>()),
        (any::<u64>(), any::<u64>(), 1u32..64, any::<bool>()),
        prop::array::uniform4(decimal()),
    )
        .prop_map(|(r, n_bits, fixed, primary, helper, (rtt, d_max, present), (trials, seed, k, ens), o)| {
            let mut f = ScenarioFile::default();
            f.radio.carrier_freq_ghz = r[0];
            f.radio.bandwidth_mhz = r[1];
            f.radio.noise_psd_dbm_per_hz = -r[2];
            f.radio.p_max_dbm = r[3];
            f.radio.ber_target = r[4];
            f.radio.cell_radius_m = r[5];
            f.radio.min_distance_m = r[6];
            f.radio.shadowing_std_db = r[7];
            f.radio.n_bits = n_bits;
            f.radio.fixed_distance_m = fixed;
            f.radio.fading = if ens { Fading::None } else { Fading::Rayleigh };
            f.primary = primary;
            f.helper = helper;
            f.backhaul.rtt_ms = rtt;
            f.backhaul.helper_present = present;
            f.goal.d_max_ms = d_max;
            f.trials = trials;
            f.seed = seed;
            f.num_devices = k;
            f.mode = if ens { InferenceMode::Ensemble } else { InferenceMode::Standalone };
            f.oracle = OracleConfig::Synthetic(SyntheticOracleParams {
                a_p_clean: o[0],
                a_h_clean: o[1],
                joint_clean: o[2],
                ber_knee: o[3],
                ..SyntheticOracleParams::default()
            });
            f
        })
}

proptest! {
    #[test]
    fn parse_serialize_parse_is_bit_identical(file in scenario()) {
        let text = file.to_json();
        let back = ScenarioFile::from_json(&text).unwrap();
        prop_assert_eq!(&back, &file);
        prop_assert_eq!(back.to_json(), text);
    }
}

#[test]
fn example_document_parses() {
    let text = r#"{
        "radio": {"ber_target": 1e-4, "fading": "none", "fixed_distance_m": 40.0},
        "primary": {"beta_max": 0.5},
        "helper": {"beta_max": 0.5, "workload_cycles": 1.5e8},
        "backhaul": {"rtt_ms": 10.0},
        "goal": {"d_max_ms": 80.0},
        "oracle": {"kind": "perfect"},
        "mode": "ensemble",
        "ci_method": "clopper_pearson"
    }"#;
    let file = ScenarioFile::from_json(text).unwrap();
    let c = file.to_valid_config().unwrap();
    assert_eq!(c.goal.d_max, 0.08);
    assert_eq!(c.backhaul.rtt, 0.01);
    assert_eq!(c.helper.unwrap().workload_cycles, 1.5e8);
    assert_eq!(c.oracle, OracleConfig::Perfect);
}
