use std::ffi::CStr;
use std::ptr;

use skfluct_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    unsafe {
        sk_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn two_spin_table_by_hand() {
    unsafe {
        let mut d = ptr::null_mut();
        assert_eq!(sk_disorder_from_couplings(2, [1.0].as_ptr(), 1, &mut d), SkStatus::Ok);
        let mut t = ptr::null_mut();
        assert_eq!(sk_gibbs_table(d, 1.0, &mut t), SkStatus::Ok);
        let mut log_z = 0.0;
        assert_eq!(sk_gibbs_log_z(t, &mut log_z), SkStatus::Ok);
        let expect = (4.0 * std::f64::consts::FRAC_1_SQRT_2.cosh()).ln();
        assert!((log_z - expect).abs() <= 1e-14);

        let mut probs = [0.0; 4];
        assert_eq!(sk_gibbs_probs(t, probs.as_mut_ptr(), 4), SkStatus::Ok);
        let w = std::f64::consts::FRAC_1_SQRT_2.exp();
        let z = 2.0 * w + 2.0 / w;
        assert!((probs[0] - w / z).abs() <= 1e-15);
        assert!((probs[1] - 1.0 / (w * z)).abs() <= 1e-15);

        let mut law = ptr::null_mut();
        assert_eq!(sk_overlap_law(t, t, &mut law), SkStatus::Ok);
        assert_eq!(sk_overlap_len(law), 3);
        let mut r2 = 0.0;
        assert_eq!(sk_overlap_moment(law, 2, &mut r2), SkStatus::Ok);
        // <σ1σ2>² enters once: <R²> = (1 + <σ1σ2>²)/2
        let c = (w - 1.0 / w) / (w + 1.0 / w);
        assert!((r2 - 0.5 * (1.0 + c * c)).abs() <= 1e-14);

        sk_overlap_free(law);
        sk_gibbs_free(t);
        sk_disorder_free(d);
    }
}

#[test]
fn error_codes_and_messages() {
    unsafe {
        let mut out = 0.0;
        assert_eq!(sk_nu(1.0, &mut out), SkStatus::InvalidArgument);
        assert!(!last_error().is_empty());
        assert_eq!(sk_nu(0.5, &mut out), SkStatus::Ok);
        assert!((out - 0.0188410362).abs() <= 5e-11);
        assert!(last_error().is_empty());

        assert_eq!(sk_nu(0.5, ptr::null_mut()), SkStatus::NullPointer);
        assert_eq!(sk_gibbs_log_z(ptr::null(), &mut out), SkStatus::NullPointer);
        assert!(last_error().contains("null"));

        let mut d = ptr::null_mut();
        assert_eq!(sk_disorder_sample(5, 1, 0, false, &mut d), SkStatus::Ok);
        let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(
            sk_coupled_tables(d, 0.5, 0.5, 0.5, &mut a, &mut b),
            SkStatus::MissingAux
        );
        assert!(a.is_null() && b.is_null());
        let mut g = [0.0; 9];
        assert_eq!(sk_disorder_couplings(d, g.as_mut_ptr(), 9), SkStatus::BufferTooSmall);
        sk_disorder_free(d);

        assert_eq!(sk_disorder_sample(7, 1, 0, true, &mut d), SkStatus::Ok);
        assert_eq!(
            sk_coupled_tables(d, 0.5, 1.5, 0.5, &mut a, &mut b),
            SkStatus::InvalidArgument
        );
        assert_eq!(sk_coupled_tables(d, 0.5, 0.3, 0.5, &mut a, &mut b), SkStatus::Ok);
        let mut t8 = ptr::null_mut();
        let mut d8 = ptr::null_mut();
        assert_eq!(sk_disorder_sample(8, 1, 0, false, &mut d8), SkStatus::Ok);
        assert_eq!(sk_gibbs_table(d8, 0.5, &mut t8), SkStatus::Ok);
        let mut law = ptr::null_mut();
        assert_eq!(sk_overlap_law(a, t8, &mut law), SkStatus::SizeMismatch);
        assert!(law.is_null());

        sk_gibbs_free(a);
        sk_gibbs_free(b);
        sk_gibbs_free(t8);
        sk_disorder_free(d);
        sk_disorder_free(d8);
        sk_disorder_free(ptr::null_mut());
    }
}

#[test]
fn handles_match_the_library() {
    unsafe {
        let mut d = ptr::null_mut();
        assert_eq!(sk_disorder_sample(9, 77, 3, true, &mut d), SkStatus::Ok);
        let sample = skfluct::model::sample_disorder(9, 77, 3, true).unwrap();
        let mut g = vec![0.0; 36];
        assert_eq!(sk_disorder_couplings(d, g.as_mut_ptr(), g.len()), SkStatus::Ok);
        assert_eq!(g, sample.couplings);

        let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(sk_coupled_tables(d, 0.8, 0.4, 0.6, &mut a, &mut b), SkStatus::Ok);
        let mut law = ptr::null_mut();
        assert_eq!(sk_overlap_law(a, b, &mut law), SkStatus::Ok);
        let mut q = vec![0.0; 10];
        assert_eq!(sk_overlap_weights(law, q.as_mut_ptr(), q.len()), SkStatus::Ok);
        let params = skfluct::exact::CoupledParams::new(0.4, 0.6).unwrap();
        let (ra, rb) = skfluct::exact::coupled_tables(&sample, 0.8, params).unwrap();
        assert_eq!(q, skfluct::exact::overlap_law(&ra, &rb).unwrap().q);

        sk_overlap_free(law);
        sk_gibbs_free(a);
        sk_gibbs_free(b);
        sk_disorder_free(d);
        assert_eq!(sk_exact_cap(), skfluct::exact::EXACT_CAP);
        assert_eq!(
            CStr::from_ptr(sk_version()).to_str().unwrap(),
            env!("CARGO_PKG_VERSION")
        );
    }
}
