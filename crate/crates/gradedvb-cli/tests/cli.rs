use std::path::PathBuf;
use std::process::{Command, Output};

use gradedvb::cocycles::{from_trivializations, random_cover, random_trivializations, SnCocycle};
use gradedvb::decomp::{random_decomposition, DecompositionInput};
use gradedvb::random::rng;
use gradedvb::snvb::{GeneralDecMorphism, SymModel, SymMorphism};

fn gradedvb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gradedvb")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn arg(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn signs_of_worked_partitions() {
    let o = gradedvb(&["sign", "--partition", "4,5,6|1|2,3"]);
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(0), "-1\n"));
    let o = gradedvb(&["sign", "--partition", "2|1,4|3"]);
    assert_eq!(stdout(&o), "+1\n");
    let o = gradedvb(&["sign", "--partition", "1|2,3|4|5,6,7|8,9,10"]);
    assert_eq!(stdout(&o), "+1\n");
}

#[test]
fn listing_up_to_three() {
    let o = gradedvb(&["partitions", "--n", "3"]);
    assert_eq!(stdout(&o), "1\n1,1\n2\n1,1,1\n1,2\n3\n");
}

#[test]
fn core_objects_and_buildings() {
    let o = gradedvb(&["core", "--n", "3", "--partition", "3|1,2", "--dims", "2,3,5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "core 3|1,2 n=3\nobjects - 3 1,2 1,2,3\nbuilding 3 2\nbuilding 1,2 3\nbuilding 1,2,3 5\n");
}

#[test]
fn selftest_is_deterministic_and_passes() {
    let a = gradedvb(&["selftest", "--n", "3", "--seed", "7"]);
    let b = gradedvb(&["selftest", "--n", "3", "--seed", "7", "--jobs", "4"]);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert_eq!(b.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().filter(|l| l.starts_with("FAIL")).count(), 0);
    assert!(stdout(&a).ends_with("PASS 11/11 criteria passed\n"));
}

#[test]
fn composed_symmetric_morphisms_reparse() {
    let m = SymModel::new(vec![1, 2, 1]).unwrap();
    let mut r = rng(11);
    let f = SymMorphism::random(&mut r, &m, &m, true, 3);
    let g = SymMorphism::random(&mut r, &m, &m, true, 3);
    let (a, b) = (scratch("f.sym", &f.to_text()), scratch("g.sym", &g.to_text()));
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("fg.sym");
    let o = gradedvb(&["compose", arg(&a), arg(&b), "-o", arg(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let fg = SymMorphism::from_text(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(fg, gradedvb::snvb::compose_sym(&f, &g).unwrap());
}

#[test]
fn decompose_reproduces_a_decomposition() {
    let m = SymModel::new(vec![1, 1, 2]).unwrap();
    let s = random_decomposition(&mut rng(12), &m, 3);
    let input = scratch("input.dec", &DecompositionInput::from_decomposition(&s).unwrap().to_text());
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("out.dec");
    let o = gradedvb(&["decompose", arg(&input), "-o", arg(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS order independence"));
    let back = GeneralDecMorphism::from_text(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(DecompositionInput::from_decomposition(&back).unwrap(), DecompositionInput::from_decomposition(&s).unwrap());
}

#[test]
fn mismatched_cores_fail_verification() {
    let m = SymModel::new(vec![1, 1, 1, 1]).unwrap();
    let mut r = rng(13);
    let a = DecompositionInput::from_decomposition(&random_decomposition(&mut r, &m, 3)).unwrap();
    let b = DecompositionInput::from_decomposition(&random_decomposition(&mut r, &m, 3)).unwrap();
    let mixed = DecompositionInput { sigma: a.sigma, cores: b.cores };
    let o = gradedvb(&["decompose", arg(&scratch("mixed.dec", &mixed.to_text()))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("FAIL compatibility"));
}

#[test]
fn cocycle_from_trivializations_verifies() {
    let m = SymModel::new(vec![1, 2]).unwrap();
    let mut r = rng(14);
    let cover = random_cover(&mut r, 3, 4);
    let phis = random_trivializations(&mut r, &cover, &m, false, 3);
    let c = from_trivializations(&cover, &m, &phis).unwrap();
    let o = gradedvb(&["verify-cocycle", arg(&scratch("good.cocycle", &c.to_text()))]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS routes agree"));
    SnCocycle::from_text(&c.to_text()).unwrap();
}

#[test]
fn malformed_input_exits_with_two_and_a_line_number() {
    let bad = scratch("bad.sym", "symmorphism source=1,2 target=1,2\ncomponent 1\n  oops\n");
    let o = gradedvb(&["verify-cocycle", arg(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    let o = gradedvb(&["compose", arg(&bad), arg(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"), "{}", String::from_utf8_lossy(&o.stderr));
    let o = gradedvb(&["sign", "--partition", "1,1|2"]);
    assert_eq!(o.status.code(), Some(2));
}
