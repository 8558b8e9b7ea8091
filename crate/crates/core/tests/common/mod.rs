#![allow(dead_code)]

use std::path::PathBuf;

use braidscape::tree::Tree;

pub fn tree_path(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "..", "trees", name].iter().collect()
}

pub fn load(name: &str) -> Tree {
    let text = std::fs::read_to_string(tree_path(name)).expect("tree file");
    Tree::parse_json(&text).expect("valid tree")
}

/// Small trees used across the suites, by short name.
pub const CORPUS: [(&str, &str); 5] = [
    ("path", "path.json"),
    ("Y", "y.json"),
    ("H", "h.json"),
    ("star-4", "star4.json"),
    ("caterpillar-4", "caterpillar4.json"),
];

pub fn corpus() -> Vec<(&'static str, Tree)> {
    CORPUS.iter().map(|(label, file)| (*label, load(file))).collect()
}

/// Base `v0` with a single child, `parents[i]` the parent of vertex `i + 2`
/// reduced into range.
pub fn tree_from_parents(parents: &[usize]) -> Tree {
    let count = parents.len() + 2;
    let mut rotation: Vec<Vec<usize>> = vec![Vec::new(); count];
    let mut link = |a: usize, b: usize| {
        rotation[a].push(b);
        rotation[b].push(a);
    };
    link(0, 1);
    for (i, &p) in parents.iter().enumerate() {
        let child = i + 2;
        link(1 + p % (child - 1), child);
    }
    let ids = (0..count).map(|i| format!("v{i}")).collect();
    Tree::from_parts(ids, rotation, 0).expect("parent lists give trees")
}
