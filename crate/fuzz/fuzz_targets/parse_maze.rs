#![no_main]
use dropmaze::maze::{emit_maze, parse_maze};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = parse_maze(text) {
        // anything accepted must survive a write and re-read
        assert_eq!(parse_maze(&emit_maze(&m)).as_ref(), Ok(&m));
    }
});
