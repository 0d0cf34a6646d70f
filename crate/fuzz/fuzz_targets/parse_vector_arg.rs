#![no_main]
use libfuzzer_sys::fuzz_target;
use tcp_core::io::parse_vector_arg;

fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else {
        return;
    };
    let n = usize::from(n % 8) + 1;
    let text = String::from_utf8_lossy(rest);
    if let Ok(v) = parse_vector_arg(&text, n) {
        assert_eq!(v.len(), n);
        assert!(v.iter().all(|x| x.is_finite()));
    }
});
