use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lexspec::load_embeddings;
use tempfile::TempDir;

const VECTORS: &str = "\
animal 0.31 -0.22 0.80 0.05 -0.41 0.12
dog 0.52 0.18 -0.30 0.44 0.09 -0.27
cat -0.15 0.61 0.23 -0.36 0.28 0.40
terrier 0.07 -0.48 0.19 0.66 -0.13 0.35
poodle -0.58 0.11 0.42 -0.09 0.51 -0.16
siamese 0.26 0.33 -0.57 -0.21 0.14 0.62
happy -0.44 -0.17 0.08 0.29 0.73 0.02
glad 0.63 -0.35 -0.12 0.17 -0.24 0.48
sad 0.11 0.54 0.36 -0.62 -0.07 -0.31
";

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let f = Fixture { dir };
        f.write("vectors.txt", VECTORS);
        f.write(
            "entail.txt",
            "# hyponym hypernym\ndog animal\ncat animal\nterrier dog\npoodle dog\nsiamese cat\n",
        );
        f.write("attract.txt", "happy glad\n");
        f.write("repel.txt", "happy sad\n");
        f.write(
            "detect.txt",
            "terrier animal le\nanimal terrier rle\nhappy dog other\ndog animal le\ncat dog other\nsiamese animal le\n",
        );
        f.write(
            "direction.txt",
            "terrier dog\ndog animal\nsiamese cat\nunicorn animal\n",
        );
        f
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, text: &str) {
        fs::write(self.path(name), text).unwrap();
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_lexspec"))
            .current_dir(self.dir.path())
            .args(args)
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> String {
        let out = self.run(args);
        assert!(
            out.status.success(),
            "lexspec {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).unwrap()
    }

    fn specialize(&self, output: &str, extra: &[&str]) -> String {
        let mut args = vec![
            "specialize",
            "--vectors",
            "vectors.txt",
            "--output",
            output,
            "--entail",
            "entail.txt",
            "--attract",
            "attract.txt",
            "--repel",
            "repel.txt",
        ];
        args.extend_from_slice(extra);
        self.ok(&args)
    }
}

fn load(path: &Path) -> lexspec::VectorSpace {
    load_embeddings(fs::read(path).unwrap().as_slice(), false)
        .unwrap()
        .0
}

/// `key<TAB>value` lines of a text report.
fn field(report: &str, key: &str) -> f64 {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}\t")))
        .unwrap_or_else(|| panic!("no `{key}` in report:\n{report}"))
        .parse()
        .unwrap()
}

#[test]
fn rerun_with_same_seed_is_byte_identical() {
    let f = Fixture::new();
    f.specialize("a.txt", &["--seed", "5", "--batch-size", "2"]);
    f.specialize("b.txt", &["--seed", "5", "--batch-size", "2"]);
    let a = fs::read(f.path("a.txt")).unwrap();
    assert_eq!(a, fs::read(f.path("b.txt")).unwrap());
    assert_ne!(a, fs::read(f.path("vectors.txt")).unwrap());
}

#[test]
fn zero_epochs_reproduces_input() {
    let f = Fixture::new();
    f.specialize("out.txt", &["--epochs", "0", "--no-normalize"]);
    assert_eq!(load(&f.path("out.txt")), load(&f.path("vectors.txt")));
}

#[test]
fn defaults_are_echoed_in_header_and_log() {
    let f = Fixture::new();
    let stdout = f.specialize("out.txt", &[]);
    let log = fs::read_to_string(f.path("out.txt.log")).unwrap();
    for text in [&stdout, &log] {
        for line in [
            "# delta_att=0.6",
            "# delta_rep=0",
            "# lambda_reg=1e-9",
            "# k1=128",
            "# k2=128",
            "# k3=128",
            "# epochs=5",
            "# variant=d2",
            "# mode=full",
            "# entail_pairs=8",
        ] {
            assert!(text.lines().any(|l| l == line), "missing {line}");
        }
    }
    assert_eq!(
        stdout.lines().filter(|l| l.starts_with("epoch ")).count(),
        5
    );
    let table: Vec<&str> = log.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(table.len(), 6);
    assert!(table[0].starts_with("epoch\tsteps"));
}

#[test]
fn no_closure_trains_on_direct_pairs_only() {
    let f = Fixture::new();
    let stdout = f.specialize("out.txt", &["--no-closure", "--log", "run.log"]);
    assert!(stdout.lines().any(|l| l == "# entail_pairs=5"));
    assert!(f.path("run.log").exists());
}

#[test]
fn eval_direction_reports_metric_and_oov() {
    let f = Fixture::new();
    f.write(
        "ordered.txt",
        "animal 3 0\ndog 0 2\ncat 1.5 0\nterrier 1 0\nsiamese 0.5 0.5\n",
    );
    let out = f.ok(&[
        "eval-direction",
        "--vectors",
        "ordered.txt",
        "--dataset",
        "direction.txt",
    ]);
    assert_eq!(field(&out, "accuracy"), 1.0);
    assert_eq!(field(&out, "evaluated"), 3.0);
    assert_eq!(field(&out, "oov"), 1.0);
    assert!(out.lines().any(|l| l == "# command=eval-direction"));
}

#[test]
fn tsv_report_is_one_header_and_one_row() {
    let f = Fixture::new();
    f.specialize("out.txt", &["--epochs", "3"]);
    let out = f.ok(&[
        "eval-detect",
        "--vectors",
        "out.txt",
        "--dataset",
        "detect.txt",
        "--tune-fraction",
        "0.3",
        "--iterations",
        "50",
        "--report",
        "tsv",
    ]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    let header: Vec<&str> = lines[0].split('\t').collect();
    let row: Vec<&str> = lines[1].split('\t').collect();
    assert_eq!(header.len(), row.len());
    let col = |k: &str| row[header.iter().position(|h| *h == k).unwrap()];
    assert_eq!(col("iterations"), "50");
    assert_eq!(col("tune_fraction"), "0.3");
    let acc: f64 = col("accuracy").parse().unwrap();
    assert!((0.0..=1.0).contains(&acc));
}

#[test]
fn eval_graded_and_sim_report_rho() {
    let f = Fixture::new();
    f.write(
        "graded.txt",
        "terrier animal 5.5\nanimal terrier 0.3\ndog cat 1\nterrier dog 6\n",
    );
    f.write(
        "sim.txt",
        "happy glad 9\nhappy sad 1\ndog cat 5\nterrier poodle 6\n",
    );
    f.specialize("out.txt", &[]);
    for (cmd, data) in [("eval-graded", "graded.txt"), ("eval-sim", "sim.txt")] {
        let out = f.ok(&[cmd, "--vectors", "out.txt", "--dataset", data]);
        let rho = field(&out, "rho");
        assert!((-1.0..=1.0).contains(&rho));
        assert_eq!(field(&out, "evaluated"), 4.0);
    }
    // ratings outside [0, 6] are rejected for graded entailment
    let out = f.run(&[
        "eval-graded",
        "--vectors",
        "out.txt",
        "--dataset",
        "sim.txt",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("sim.txt"));
}

#[test]
fn eval_bibless_runs() {
    let f = Fixture::new();
    f.specialize("out.txt", &[]);
    let out = f.ok(&[
        "eval-bibless",
        "--vectors",
        "out.txt",
        "--dataset",
        "detect.txt",
        "--tune-fraction",
        "0.3",
    ]);
    assert!((0.0..=1.0).contains(&field(&out, "accuracy")));
}

#[test]
fn score_of_a_word_with_itself_is_zero() {
    let f = Fixture::new();
    let out = f.ok(&["score", "--vectors", "vectors.txt", "dog", "dog"]);
    assert_eq!(field(&out, "i_le"), 0.0);
    assert_eq!(field(&out, "distance"), 0.0);
}

#[test]
fn score_parts_add_up() {
    let f = Fixture::new();
    for variant in ["d1", "d2", "d3"] {
        let out = f.ok(&[
            "score",
            "--vectors",
            "vectors.txt",
            "--variant",
            variant,
            "terrier",
            "animal",
        ]);
        let recomputed = field(&out, "dcos") + field(&out, "distance");
        assert!((field(&out, "i_le") - recomputed).abs() < 1e-12);
        assert!((field(&out, "dcos") - (1.0 - field(&out, "cosine"))).abs() < 1e-12);
    }
}

#[test]
fn trained_toy_orders_hyponym_before_hypernym() {
    let f = Fixture::new();
    f.specialize("out.txt", &[]);
    let score = |x: &str, y: &str| field(&f.ok(&["score", "--vectors", "out.txt", x, y]), "i_le");
    assert!(score("terrier", "animal") < score("animal", "terrier"));

    let out = f.ok(&[
        "inspect-norms",
        "--vectors",
        "out.txt",
        "terrier",
        "dog",
        "animal",
    ]);
    let words: Vec<&str> = out
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split('\t').next().unwrap())
        .collect();
    assert_eq!(words, ["terrier", "dog", "animal"]);
}

#[test]
fn inspect_norms_defaults_to_sorted_full_vocabulary() {
    let f = Fixture::new();
    let out = f.ok(&["inspect-norms", "--vectors", "vectors.txt"]);
    let norms: Vec<f64> = out
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split('\t').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(norms.len(), 9);
    assert!(norms.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn inspect_norms_reports_unknown_words_without_failing() {
    let f = Fixture::new();
    let out = f.ok(&[
        "inspect-norms",
        "--vectors",
        "vectors.txt",
        "dog",
        "unicorn",
    ]);
    assert!(out.lines().any(|l| l == "# unknown\tunicorn"));
    assert!(out.lines().any(|l| l.starts_with("dog\t")));
}

#[test]
fn errors_exit_nonzero_with_a_message() {
    let f = Fixture::new();
    let cases: [(&[&str], &str); 4] = [
        (
            &["score", "--vectors", "vectors.txt", "dog", "unicorn"],
            "unicorn",
        ),
        (
            &[
                "specialize",
                "--vectors",
                "vectors.txt",
                "--output",
                "o.txt",
            ],
            "--entail",
        ),
        (
            &[
                "eval-direction",
                "--vectors",
                "missing.txt",
                "--dataset",
                "direction.txt",
            ],
            "missing.txt",
        ),
        (
            &[
                "specialize",
                "--vectors",
                "vectors.txt",
                "--output",
                "o.txt",
                "--entail",
                "entail.txt",
                "--lr",
                "0",
            ],
            "learning rate",
        ),
    ];
    for (args, needle) in cases {
        let out = f.run(args);
        assert!(!out.status.success(), "{args:?} should fail");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "{args:?}: {err}");
    }
}

#[test]
fn cyclic_entailment_is_rejected() {
    let f = Fixture::new();
    f.write("cycle.txt", "dog animal\nanimal dog\n");
    let out = f.run(&[
        "specialize",
        "--vectors",
        "vectors.txt",
        "--output",
        "o.txt",
        "--entail",
        "cycle.txt",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("cycle"));
    assert!(!f.path("o.txt").exists());
}
