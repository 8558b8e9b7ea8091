use super::Tree;

impl Tree {
    /// Inserts degree-2 vertices until every chain has at least `n - 1` edges.
    ///
    /// New vertices on a chain are spread as evenly as possible over its
    /// edges, extra ones going to the edges nearest the end the chain was
    /// first walked from. Ids are derived from the endpoint ids, so the
    /// result is deterministic. Already subdivided trees come back unchanged.
    pub fn subdivide_for(&self, n: usize) -> Tree {
        let need = n.saturating_sub(1);
        let mut ids = self.ids.clone();
        let mut rotation = self.rotation.clone();
        let mut taken: std::collections::HashSet<String> = ids.iter().cloned().collect();

        for chain in self.chains() {
            let len = chain.len() - 1;
            if len >= need {
                continue;
            }
            let extra = need - len;
            for (j, w) in chain.windows(2).enumerate() {
                let count = extra / len + usize::from(j < extra % len);
                if count == 0 {
                    continue;
                }
                let (a, b) = (w[0], w[1]);
                let mut fresh = Vec::with_capacity(count);
                for k in 1..=count {
                    let mut id = format!("{}~{}.{}", self.ids[a], self.ids[b], k);
                    while taken.contains(&id) {
                        id.push('\'');
                    }
                    taken.insert(id.clone());
                    fresh.push(ids.len());
                    ids.push(id);
                    rotation.push(Vec::new());
                }
                let seq: Vec<usize> = std::iter::once(a)
                    .chain(fresh.iter().copied())
                    .chain(std::iter::once(b))
                    .collect();
                for slot in rotation[a].iter_mut() {
                    if *slot == b {
                        *slot = seq[1];
                    }
                }
                for slot in rotation[b].iter_mut() {
                    if *slot == a {
                        *slot = seq[seq.len() - 2];
                    }
                }
                for i in 1..seq.len() - 1 {
                    rotation[seq[i]] = vec![seq[i - 1], seq[i + 1]];
                }
            }
        }
        Tree::from_parts(ids, rotation, self.base).expect("subdivision preserves validity")
    }
}
