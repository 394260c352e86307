use std::f64::consts::TAU;
use std::ffi::{CStr, CString};
use std::ptr;

use mwion_ffi::*;

const TABLE_CONFIG: &str = r#"
frequency_units = "Hz"
species = "171Yb+"
n_ions = 10
omega_z = 1e5
gradient_b = 9.89
"#;

fn config(text: &str) -> *mut MwionConfig {
    let c = CString::new(text).unwrap();
    let mut out = ptr::null_mut();
    let st = unsafe { mwion_config_from_str(c.as_ptr(), &mut out) };
    assert_eq!(st, MwionStatus::Ok);
    assert!(!out.is_null());
    out
}

fn last_error() -> String {
    let p = mwion_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn three_ion_chain_through_handles() {
    unsafe {
        let mut cfg = ptr::null_mut();
        assert_eq!(
            mwion_config_yb171(3, TAU * 1e5, 0.0, 0.0, 0.0, &mut cfg),
            MwionStatus::Ok
        );
        assert_eq!(mwion_config_n_ions(cfg), 3);
        let mut chain = ptr::null_mut();
        assert_eq!(mwion_chain_solve(cfg, &mut chain), MwionStatus::Ok);
        assert_eq!(mwion_chain_n_ions(chain), 3);

        let mut w = [0.0; 3];
        assert_eq!(
            mwion_chain_mode_frequencies(chain, w.as_mut_ptr(), 3),
            MwionStatus::Ok
        );
        let ratios: Vec<f64> = w.iter().map(|x| x / (TAU * 1e5)).collect();
        for (r, want) in ratios.iter().zip([1.0, 3f64.sqrt(), (29.0f64 / 5.0).sqrt()]) {
            assert!((r - want).abs() < 1e-10);
        }

        let mut z = [0.0; 3];
        assert_eq!(mwion_chain_positions(chain, z.as_mut_ptr(), 3), MwionStatus::Ok);
        assert!((z[0] + z[2]).abs() < 1e-18 && z[1].abs() < 1e-18);

        let mut v = [0.0; 3];
        assert_eq!(
            mwion_chain_mode_vector(chain, 0, v.as_mut_ptr(), 3),
            MwionStatus::Ok
        );
        for c in v {
            assert!((c - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        }
        assert_eq!(
            mwion_chain_mode_vector(chain, 3, v.as_mut_ptr(), 3),
            MwionStatus::InvalidArgument
        );

        let mut small = [0.0; 2];
        assert_eq!(
            mwion_chain_positions(chain, small.as_mut_ptr(), 2),
            MwionStatus::InvalidArgument
        );
        assert!(last_error().contains("buffer"));

        mwion_chain_free(chain);
        mwion_config_free(cfg);
    }
}

#[test]
fn coupling_and_gradient() {
    unsafe {
        let cfg = config(TABLE_CONFIG);
        let mut b = 0.0;
        assert_eq!(mwion_required_gradient(cfg, &mut b), MwionStatus::Ok);
        assert!((b / 9.89 - 1.0).abs() < 0.01);

        let mut chain = ptr::null_mut();
        assert_eq!(mwion_chain_solve(cfg, &mut chain), MwionStatus::Ok);
        let mut eps = 0.0;
        assert_eq!(mwion_epsilon_c(cfg, chain, 5, 0, &mut eps), MwionStatus::Ok);
        assert!((eps / 0.0075 - 1.0).abs() < 0.05);
        let mut eta = 0.0;
        assert_eq!(
            mwion_lamb_dicke(cfg, chain, 5, 0, TAU * 12.6e9, 0.0, &mut eta),
            MwionStatus::Ok
        );
        assert!(eta > 0.0 && eta < 1e-5);
        assert_eq!(
            mwion_epsilon_c(cfg, chain, 10, 0, &mut eps),
            MwionStatus::InvalidArgument
        );

        let mut other = ptr::null_mut();
        assert_eq!(
            mwion_config_yb171(4, TAU * 1e5, 0.0, 1.0, 0.0, &mut other),
            MwionStatus::Ok
        );
        assert_eq!(
            mwion_epsilon_c(other, chain, 0, 0, &mut eps),
            MwionStatus::InvalidArgument
        );
        mwion_config_free(other);

        mwion_chain_free(chain);
        mwion_config_free(cfg);
    }
}

#[test]
fn kappa_and_gate_error() {
    unsafe {
        let cfg = config(TABLE_CONFIG);
        let mut k = 0.0;
        assert_eq!(mwion_kappa(cfg, 0.0, MWION_LEVEL_UPPER, &mut k), MwionStatus::Ok);
        assert!((k - 1.0).abs() < 1e-15);
        assert_eq!(mwion_kappa(cfg, 0.0, MWION_LEVEL_LOWER, &mut k), MwionStatus::Ok);
        assert!(k.abs() < 1e-15);
        assert_eq!(mwion_kappa(cfg, 0.0, 7, &mut k), MwionStatus::InvalidArgument);

        let mut e = 0.0;
        assert_eq!(mwion_gate_error_closed_form(0.01, 1.0, &mut e), MwionStatus::Ok);
        assert!((e - 41.0 / 120.0 * 1e-4).abs() < 1e-15);
        assert_eq!(
            mwion_gate_error_closed_form(0.01, 0.0, &mut e),
            MwionStatus::InvalidArgument
        );
        mwion_config_free(cfg);
    }
}

#[test]
fn spread_is_deterministic() {
    unsafe {
        let mut cfg = ptr::null_mut();
        assert_eq!(
            mwion_config_yb171(5, TAU * 1e5, 0.0, 20.0, 0.0, &mut cfg),
            MwionStatus::Ok
        );
        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(
            mwion_frequency_spread(cfg, 3, MWION_CONVENTION_MEAN_FORCE, &mut a),
            MwionStatus::Ok
        );
        assert_eq!(
            mwion_frequency_spread(cfg, 3, MWION_CONVENTION_MEAN_FORCE, &mut b),
            MwionStatus::Ok
        );
        assert!(a > 0.0);
        assert_eq!(a.to_bits(), b.to_bits());
        assert_eq!(
            mwion_frequency_spread(cfg, 3, 9, &mut a),
            MwionStatus::InvalidArgument
        );
        mwion_config_free(cfg);
    }
}

#[test]
fn design_report_json() {
    unsafe {
        let cfg = config(TABLE_CONFIG);
        let mut s = ptr::null_mut();
        assert_eq!(mwion_design_report_json(cfg, 1, false, &mut s), MwionStatus::Ok);
        let text = CStr::from_ptr(s).to_str().unwrap().to_owned();
        mwion_string_free(s);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let b = v["coupling"]["required_gradient"].as_f64().unwrap();
        assert!((b / 9.89 - 1.0).abs() < 0.01);
        assert!(v["spread"].is_null());
        mwion_config_free(cfg);
    }
}

#[test]
fn table_without_fidelity() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(mwion_table1_csv(false, 0, &mut s), MwionStatus::Ok);
        let text = CStr::from_ptr(s).to_str().unwrap().to_owned();
        mwion_string_free(s);
        assert_eq!(text.lines().count(), 1 + 12);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let bad = CString::new("n_ions = 0").unwrap();
        let mut out = ptr::null_mut();
        assert_eq!(
            mwion_config_from_str(bad.as_ptr(), &mut out),
            MwionStatus::ConfigError
        );
        assert!(out.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(
            mwion_config_from_str(ptr::null(), &mut out),
            MwionStatus::NullPointer
        );
        assert_eq!(
            mwion_chain_solve(ptr::null(), ptr::null_mut()),
            MwionStatus::NullPointer
        );
        assert_eq!(mwion_config_n_ions(ptr::null()), 0);
        mwion_config_free(ptr::null_mut());
        mwion_chain_free(ptr::null_mut());
        mwion_string_free(ptr::null_mut());

        let mut cfg = ptr::null_mut();
        assert_eq!(
            mwion_config_yb171(0, 1.0, 0.0, 0.0, 0.0, &mut cfg),
            MwionStatus::ConfigError
        );
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(mwion_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_lists_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/mwion.h")).unwrap();
    let source = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() > 15);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
}
