use eulerflow_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

fn example() -> *mut EulerflowMetric {
    let name = CString::new("paper-example-sl2c").unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { eulerflow_metric_from_preset(name.as_ptr(), &mut m) }, EulerflowStatus::Ok);
    assert!(!m.is_null());
    m
}

#[test]
fn metric_lifecycle_and_field() {
    let ainv = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0];
    let mut m = ptr::null_mut();
    let st = unsafe { eulerflow_metric_new(EulerflowAlgebra::Sl2r, ainv.as_ptr(), ainv.len(), &mut m) };
    assert_eq!(st, EulerflowStatus::Ok);
    assert_eq!(unsafe { eulerflow_metric_dim(m) }, 3);
    // xi is Killing for this metric, so A xi is an equilibrium.
    let x = [0.0, 0.0, 0.5];
    let mut f = [1.0; 3];
    assert_eq!(unsafe { eulerflow_euler_field(m, x.as_ptr(), 3, f.as_mut_ptr()) }, EulerflowStatus::Ok);
    assert!(f.iter().all(|v| v.abs() < 1e-14));
    unsafe { eulerflow_metric_free(m) };
}

#[test]
fn errors_set_status_and_message() {
    let mut m = ptr::null_mut();
    let bad = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -2.0];
    let st = unsafe { eulerflow_metric_new(EulerflowAlgebra::Sl2r, bad.as_ptr(), 9, &mut m) };
    assert_eq!(st, EulerflowStatus::NotLorentzian);
    assert!(m.is_null());
    assert!(last_error_string().contains("not Lorentzian"));

    let st = unsafe { eulerflow_metric_new(EulerflowAlgebra::Sl2c, bad.as_ptr(), 9, &mut m) };
    assert_eq!(st, EulerflowStatus::DimensionMismatch);
    let st = unsafe { eulerflow_metric_new(EulerflowAlgebra::Sl2c, ptr::null(), 36, &mut m) };
    assert_eq!(st, EulerflowStatus::NullPointer);

    let name = CString::new("nope").unwrap();
    assert_eq!(unsafe { eulerflow_metric_from_preset(name.as_ptr(), &mut m) }, EulerflowStatus::UnknownPreset);
    let msg = unsafe { CStr::from_ptr(eulerflow_last_error()) }.to_str().unwrap().to_owned();
    assert!(msg.contains("nope"));

    let mut f = [0.0; 6];
    let x = [0.0; 6];
    assert_eq!(
        unsafe { eulerflow_euler_field(ptr::null(), x.as_ptr(), 6, f.as_mut_ptr()) },
        EulerflowStatus::NullPointer
    );
    unsafe {
        eulerflow_metric_free(ptr::null_mut());
        eulerflow_trajectory_free(ptr::null_mut());
        eulerflow_string_free(ptr::null_mut());
    }
}

#[test]
fn integrate_and_read_samples() {
    let m = example();
    let u0 = [0.3, -0.2, 0.5, 0.1, 0.4, -0.3];
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { eulerflow_integrate(m, u0.as_ptr(), 6, 5.0, &mut t) }, EulerflowStatus::Ok);
    let mut info = EulerflowTrajectoryInfo {
        status: EulerflowTrajectoryStatus::StepLimit,
        samples: 0,
        t_end: 0.0,
        escape_time: 0.0,
        escape_time_estimate: 0.0,
        sup_norm: 0.0,
        max_drift: 1.0,
    };
    assert_eq!(unsafe { eulerflow_trajectory_info(t, &mut info) }, EulerflowStatus::Ok);
    assert_eq!(info.status, EulerflowTrajectoryStatus::CompletedHorizon);
    assert_eq!(info.t_end, 5.0);
    assert!(info.escape_time.is_nan());
    assert!(info.max_drift < 1e-8);
    let (mut time, mut state) = (1.0, [0.0; 6]);
    assert_eq!(
        unsafe { eulerflow_trajectory_sample(t, 0, &mut time, state.as_mut_ptr(), 6) },
        EulerflowStatus::Ok
    );
    assert_eq!((time, state), (0.0, u0));
    assert_eq!(
        unsafe { eulerflow_trajectory_sample(t, info.samples, &mut time, state.as_mut_ptr(), 6) },
        EulerflowStatus::InvalidArgument
    );
    unsafe {
        eulerflow_trajectory_free(t);
        eulerflow_metric_free(m);
    }
}

#[test]
fn classification_and_killing_generators() {
    let m = example();
    let mut status = EulerflowVerdict::Undetermined;
    let mut rule = ptr::null_mut();
    assert_eq!(unsafe { eulerflow_classify(m, 0, &mut status, &mut rule) }, EulerflowStatus::Ok);
    assert_eq!(status, EulerflowVerdict::CompleteCertified);
    assert_eq!(unsafe { CStr::from_ptr(rule) }.to_str().unwrap(), "timelike-killing-field");
    unsafe { eulerflow_string_free(rule) };

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { eulerflow_classify_json(m, 0, &mut json) }, EulerflowStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(json) }.to_str().unwrap()).unwrap();
    assert_eq!(v["status"], "Complete_certified");
    unsafe { eulerflow_string_free(json) };

    let mut count = 0;
    assert_eq!(
        unsafe { eulerflow_find_killing(m, ptr::null_mut(), 0, &mut count) },
        EulerflowStatus::BufferTooSmall
    );
    assert_eq!(count, 1);
    let mut buf = [0.0; 6];
    assert_eq!(unsafe { eulerflow_find_killing(m, buf.as_mut_ptr(), 6, &mut count) }, EulerflowStatus::Ok);
    assert!((buf[2].abs() - 1.0).abs() < 1e-12);
    unsafe { eulerflow_metric_free(m) };
}

#[test]
fn header_is_valid_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/eulerflow.h");
    let text = std::fs::read_to_string(header).unwrap();
    for sym in ["eulerflow_metric_new", "eulerflow_last_error", "typedef struct EulerflowMetric EulerflowMetric"] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    // Compile check when a C compiler is available.
    if let Ok(out) = std::process::Command::new("cc").args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", header]).output() {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}
