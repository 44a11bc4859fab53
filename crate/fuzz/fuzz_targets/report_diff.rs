#![no_main]
use dropmaze::scenario::diff_reports;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    // split the input into the two reports at the first NUL
    let (a, b) = text.split_once('\0').unwrap_or((text, text));
    let _ = diff_reports(a, b);
});
