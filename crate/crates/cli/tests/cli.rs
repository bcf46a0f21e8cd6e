use std::fs;
use std::process::{Command, Output};

fn mdcc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdcc")).args(args).output().expect("run mdcc")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn encode_decode_check_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.bin");
    let packed = dir.path().join("out.mdc");
    let back = dir.path().join("back.bin");
    let data: Vec<u8> = (0..1024u32).map(|i| (i * 7919 % 251) as u8).collect();
    fs::write(&input, &data).unwrap();
    for flags in [
        &["--constraint", "zrcf", "--n", "4", "--shape", "2,3"][..],
        &["--constraint", "vzrcf", "--n", "4", "--d", "2", "--V", "5"],
        &["--constraint", "rf", "--n", "4", "--shape", "3,3"],
        &["--constraint", "hdrf", "--n", "5", "--shape", "4,4", "--p", "2"],
    ] {
        let mut args = vec!["encode"];
        args.extend_from_slice(flags);
        args.extend([input.to_str().unwrap(), "-o", packed.to_str().unwrap()]);
        assert_eq!(code(&mdcc(&args)), 0, "{flags:?}");
        let out = mdcc(&["decode", packed.to_str().unwrap(), "-o", back.to_str().unwrap()]);
        assert_eq!(code(&out), 0);
        assert_eq!(fs::read(&back).unwrap(), data);
        let out = mdcc(&["check", packed.to_str().unwrap()]);
        assert_eq!(code(&out), 0);
        assert!(String::from_utf8_lossy(&out.stdout).contains("0 invalid"));
    }
}

#[test]
fn bound_spot_values() {
    let out = mdcc(&["bound", "--constraint", "zrcf", "--n", "256", "--d", "2"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "zrcf n=256 d=2: side = 5");
    let out = mdcc(&["bound", "--constraint", "rf", "--n", "256", "--d", "2"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "rf n=256 d=2: side = 6");
    let out = mdcc(&["bound", "--constraint", "zrcf", "--n", "16", "--d", "1"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "zrcf n=16 d=1: side = 5");
    let out = mdcc(&["bound", "--constraint", "vzrcf", "--n", "4", "--d", "2"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "vzrcf n=4 d=2: V = 5");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.bin");
    fs::write(&input, b"abc").unwrap();
    let input = input.to_str().unwrap();

    assert_eq!(code(&mdcc(&["--help"])), 0);
    assert_eq!(code(&mdcc(&["--version"])), 0);
    assert_eq!(code(&mdcc(&["frobnicate"])), 1);
    assert_eq!(code(&mdcc(&["encode", "--constraint", "rf", "--n", "4", input])), 1);

    let out = mdcc(&["encode", "--constraint", "rf", "--n", "4", "--shape", "1,1", input]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("<= sub-array volume = 1"));

    // not a container
    assert_eq!(code(&mdcc(&["decode", input])), 2);
    assert_eq!(code(&mdcc(&["check", input])), 2);
}

#[test]
fn corrupt_block_reports_index() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.bin");
    let packed = dir.path().join("out.mdc");
    fs::write(&input, [0u8; 8]).unwrap();
    let args = ["encode", "--constraint", "zrcf", "--n", "4", "--shape", "2,3", input.to_str().unwrap(), "-o", packed.to_str().unwrap()];
    assert_eq!(code(&mdcc(&args)), 0);
    let mut bytes = fs::read(&packed).unwrap();
    // header is 27 bytes; zero the first block so it violates the constraint
    bytes[27] = 0;
    bytes[28] &= 0x01;
    fs::write(&packed, &bytes).unwrap();
    let out = mdcc(&["decode", packed.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("block 0"));
    assert_eq!(code(&mdcc(&["check", packed.to_str().unwrap()])), 3);
}

#[test]
fn stats_all_zero_message() {
    let out = mdcc(&["stats", "--constraint", "zrcf", "--n", "4", "--shape", "2,3", "--zero"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("blocks 1"));
    assert!(!text.contains("iterations 0:"), "{text}");
}

#[test]
fn stats_random_trials_mostly_untouched() {
    let out = mdcc(&["stats", "--constraint", "zrcf", "--n", "8", "--shape", "3,3", "--trials", "10000", "--seed", "1"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    let zero: u64 = text
        .lines()
        .find_map(|l| l.strip_prefix("iterations 0: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(zero > 9000, "{text}");
}

#[test]
fn selftest_passes() {
    let out = mdcc(&["selftest", "--seed", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}
