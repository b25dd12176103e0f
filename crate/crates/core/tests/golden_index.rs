// The checked-in index must be reproduced byte for byte by a fresh
// single-threaded build. Set ROAR_BLESS=1 to rewrite it after an intended
// format or construction change, then update GOLDEN_SHA256.

use std::path::PathBuf;

use sha2::{Digest, Sha256};

use roargraph::analysis::{gen_synthetic, SyntheticParams};
use roargraph::io::{encode_index, load_index, save_index};
use roargraph::{build_roargraph, delete, BuildParams};

const GOLDEN_SHA256: &str = "c7cee5e88e05a61caad75811edf65a86f39aab359bc5f647e76a6ffb755bb772";

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/golden.roar")
}

fn build_bytes() -> Vec<u8> {
    let w = gen_synthetic(&SyntheticParams {
        n_base: 300,
        n_query_ood: 0,
        n_query_id: 0,
        n_train_ood: 300,
        dim: 8,
        seed: 7,
        intrinsic_dim: 4,
        ..SyntheticParams::default()
    })
    .unwrap();
    let params = BuildParams {
        nq: 10,
        max_degree: 8,
        search_l: 24,
    };
    let (mut index, bip) = build_roargraph(&w.base, &w.train_queries, params, 1).unwrap();
    delete(&mut index, 7).unwrap();
    encode_index(&index, Some(&bip)).unwrap()
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn golden_index_is_reproduced() {
    let bytes = build_bytes();
    if std::env::var_os("ROAR_BLESS").is_some() {
        std::fs::create_dir_all(golden_path().parent().unwrap()).unwrap();
        std::fs::write(golden_path(), &bytes).unwrap();
        eprintln!("sha256 {}", hex(&Sha256::digest(&bytes)));
        return;
    }
    let stored = std::fs::read(golden_path()).expect("golden index missing; run with ROAR_BLESS=1");
    assert_eq!(hex(&Sha256::digest(&stored)), GOLDEN_SHA256);
    assert!(bytes == stored, "fresh build differs from the golden file");
}

#[test]
fn golden_index_resaves_identically() {
    let dir = tempfile::tempdir().unwrap();
    let (index, bip) = load_index(golden_path()).unwrap();
    assert!(index.is_deleted(7));
    let p = dir.path().join("again.roar");
    save_index(&p, &index, bip.as_ref()).unwrap();
    assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(golden_path()).unwrap());
}
