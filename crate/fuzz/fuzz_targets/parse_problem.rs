#![no_main]
use libfuzzer_sys::fuzz_target;
use tcp_core::io::ProblemFile;
use tcp_core::tensor::entry_count;

fuzz_target!(|data: &[u8]| {
    let Ok(file) = ProblemFile::parse_bytes(data) else {
        return;
    };
    // Validation already bounds the size; skip the merely slow ones.
    if entry_count(file.m, file.n).is_none_or(|c| c > 1 << 16) {
        return;
    }
    let problem = file.to_problem().expect("validated file builds a problem");
    let again = ProblemFile::parse(&ProblemFile::from_problem(&problem).to_json())
        .expect("serialized problem parses")
        .to_problem()
        .unwrap();
    assert_eq!(again, problem);
});
