#![no_main]

use hpds_cli::model_file::ModelFile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(file) = ModelFile::from_slice(data) {
        // anything that parsed and validated must convert and re-serialize
        // without panicking
        let _ = file.to_system();
        let _ = file.projection_matrix();
        let _ = file.to_bytes();
    }
});
