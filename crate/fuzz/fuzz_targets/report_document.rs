#![no_main]

use libfuzzer_sys::fuzz_target;
use sevrel::ReportDocument;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(doc) = ReportDocument::from_json(text) {
        let json = doc.to_json().unwrap();
        let again = ReportDocument::from_json(&json).unwrap();
        assert_eq!(again.to_json().unwrap(), json);
    }
});
