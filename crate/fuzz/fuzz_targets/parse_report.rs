#![no_main]
use libfuzzer_sys::fuzz_target;
use tcp_core::io::RunReport;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(report) = RunReport::parse(text) {
        let back = RunReport::parse(&report.to_json()).expect("serialized report parses");
        assert_eq!(back, report);
    }
});
