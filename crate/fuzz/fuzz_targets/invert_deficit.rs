#![no_main]

use libfuzzer_sys::fuzz_target;
use sevrel::gaussian::{deficit_map, invert_deficit, GAUSSIAN_ENDPOINT};

fuzz_target!(|data: [u8; 8]| {
    let y = f64::from_le_bytes(data);
    match invert_deficit(y) {
        Ok(b) => {
            assert!(y > 0.0 && y < GAUSSIAN_ENDPOINT);
            assert!(b > 0.0 && b.is_finite(), "y = {y:e} gave b = {b:e}");
            if y >= 1e-3 {
                assert!((deficit_map(b).unwrap() - y).abs() <= 1e-12);
            }
        }
        Err(_) => assert!(!(y > 0.0 && y < GAUSSIAN_ENDPOINT)),
    }
});
