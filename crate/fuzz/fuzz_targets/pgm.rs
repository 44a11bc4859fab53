#![no_main]
use dropmaze::io::Raster;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(img) = Raster::from_pgm(data) {
        assert_eq!(Raster::from_pgm(&img.to_pgm()).unwrap(), img);
    }
});
