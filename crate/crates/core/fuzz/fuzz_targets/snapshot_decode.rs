#![no_main]

use cvsheet::fields::snapshot::Snapshot;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = Snapshot::decode(data) {
        // Anything accepted must re-encode to an equivalent snapshot.
        let again = Snapshot::decode(&s.encode()).expect("re-encoded snapshot decodes");
        assert_eq!(again.nx, s.nx);
        assert_eq!(again.ny, s.ny);
        assert_eq!(again.nz, s.nz);
        assert_eq!(again.data.len(), s.data.len());
        let _ = s.to_torus();
        let _ = s.to_strip(cvsheet::Side::Minus);
    }
});
