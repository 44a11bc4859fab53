#![no_main]
use dropmaze::io::{read_field_csv, write_scalar_csv, write_vector_csv, FieldTable};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(table) = read_field_csv(text) else { return };
    let mut buf = Vec::new();
    match &table {
        FieldTable::Scalar(f) => write_scalar_csv(f, &mut buf).unwrap(),
        FieldTable::Vector(f) => write_vector_csv(f, &mut buf).unwrap(),
    }
    assert_eq!(read_field_csv(std::str::from_utf8(&buf).unwrap()).unwrap(), table);
});
