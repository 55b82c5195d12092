#![no_main]

use libfuzzer_sys::fuzz_target;
use sevrel::SeverityLevel;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(level) = text.parse::<SeverityLevel>() {
        assert_eq!(level.label().parse::<SeverityLevel>().unwrap(), level);
    }
});
