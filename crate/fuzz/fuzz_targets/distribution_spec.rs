#![no_main]

use libfuzzer_sys::fuzz_target;
use sevrel::DistributionSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(spec) = serde_json::from_slice::<DistributionSpec>(data) else {
        return;
    };
    let Ok(spec) = spec.normalized() else {
        return;
    };
    let m = spec.moments();
    if m.variance_finite {
        assert!(m.variance >= 0.0 || m.variance.is_nan());
    }
    for x in [-1e3, 0.0, 1.0, 1e3] {
        let p = spec.cdf(x);
        assert!((0.0..=1.0).contains(&p) || p.is_nan());
    }
    if let Ok(q) = spec.quantile(0.5) {
        assert!(!q.is_nan());
    }
    let text = serde_json::to_string(&spec).unwrap();
    let back: DistributionSpec = serde_json::from_str(&text).unwrap();
    assert_eq!(back, spec);
});
