//! Pinned container bytes. Set `MDCC_BLESS=1` to rewrite the files.

use std::path::PathBuf;

use mdcc::codec::EncodeOptions;
use mdcc::container::{decode_file, encode_bits, encode_file};
use mdcc::ConstraintConfig;

const INPUT: &[u8] = b"multidimensional constrained arrays";

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn configs() -> Vec<(&'static str, ConstraintConfig)> {
    vec![
        ("zrcf", ConstraintConfig::zrcf(4, &[2, 3]).unwrap()),
        ("vzrcf", ConstraintConfig::vzrcf(4, 2, 5).unwrap()),
        ("rf", ConstraintConfig::rf(4, &[3, 3]).unwrap()),
        ("hdrf", ConstraintConfig::hdrf(5, &[4, 4], 2).unwrap()),
    ]
}

#[test]
fn pinned_files() {
    let bless = std::env::var_os("MDCC_BLESS").is_some();
    for (name, cfg) in configs() {
        let bytes = encode_file(INPUT, &cfg).unwrap();
        let path = golden(&format!("{name}.mdc"));
        if bless {
            std::fs::write(&path, &bytes).unwrap();
        }
        let want = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(bytes, want, "{name}");
        assert_eq!(decode_file(&want).unwrap(), INPUT);
    }
}

#[test]
fn all_ones_block_by_hand() {
    // 15 one bits fit one zrcf n=4 (2,3) block and already satisfy the constraint:
    // the block is the message followed by a 0 marker
    let out = encode_bits(&[true; 15], &ConstraintConfig::zrcf(4, &[2, 3]).unwrap(), EncodeOptions::default()).unwrap();
    let want: Vec<u8> = [
        &b"MDC1"[..],
        &[0x01, 0x01, 0x02],
        &[0, 0, 0, 4],
        &[0, 0, 0, 2, 0, 0, 0, 3],
        &[0, 0, 0, 0, 0, 0, 0, 15],
        &[0xff, 0xfe],
    ]
    .concat();
    assert_eq!(out, want);
}

#[test]
fn all_zero_block_by_hand() {
    // zrcf n=3 (2,3), 8 zero bits. Each step deletes the cuboid at the origin
    // (cells 0,1,3,4,6,7), keeps cells 2,5,8, writes pad 0, payload 0000 and
    // marker 1:
    //   000000000 -> 000000001 -> 001000001 -> 101000001
    // and the last one has a 1 in both in-bounds cuboids.
    let out = encode_bits(&[false; 8], &ConstraintConfig::zrcf(3, &[2, 3]).unwrap(), EncodeOptions::default()).unwrap();
    let header_len = 4 + 3 + 4 + 8 + 8;
    assert_eq!(out.len(), header_len + 2);
    assert_eq!(&out[header_len..], &[0b1010_0000, 0b1000_0000]);
}
