use std::path::Path;
use std::process::Command;

fn run_to_file(args: &[&str], out: &Path) -> Vec<u8> {
    let status = Command::new(env!("CARGO_BIN_EXE_orbitlab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("ORBITLAB_LOG_DIR")
        .status()
        .expect("binary runs");
    assert!(status.success(), "{args:?} exited with {status}");
    std::fs::read(out).unwrap()
}

#[test]
fn every_command_is_byte_identical_on_replay() {
    let dir = tempfile::tempdir().unwrap();
    let maps = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../maps");
    let z2 = maps.join("z2.json").display().to_string();
    let squares = maps.join("product_squares.json").display().to_string();
    let commands: Vec<Vec<&str>> = vec![
        vec!["census", "--map", &z2, "--n-max", "6"],
        vec![
            "census",
            "--map",
            &squares,
            "--n-max",
            "2",
            "--seed-random",
            "50",
        ],
        vec!["sample", "--trials", "200", "--seed", "9"],
        vec![
            "sample", "--n", "2", "--degree", "2", "--k-max", "1", "--trials", "4", "--seed", "2",
        ],
        vec!["split", "--order", "1", "--count", "6"],
        vec!["schedule", "--sequence", "linear", "--n1", "3"],
        vec!["lemma2", "--n", "2", "--degree", "2", "--period", "1"],
        vec![
            "eliminate",
            "--degree",
            "2",
            "--period",
            "2",
            "--lambda0",
            "-1,0",
        ],
    ];
    for (i, args) in commands.iter().enumerate() {
        let a = run_to_file(args, &dir.path().join(format!("{i}a.json")));
        let b = run_to_file(args, &dir.path().join(format!("{i}b.json")));
        assert!(!a.is_empty());
        assert_eq!(a, b, "{args:?} is not deterministic");
    }
}
