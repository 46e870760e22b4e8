//! Agents, papers, and the bibliometric indicators computed over them.

use std::cmp::Reverse;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(pub u32);

impl AgentId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "agent#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PaperId(pub u32);

impl PaperId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A publication record.
#[derive(Debug, Clone, PartialEq)]
pub struct Paper {
    pub id: PaperId,
    pub authors: Vec<AgentId>,
    /// The alpha author when it is one of the simulated agents. `None` means
    /// the alpha author is a co-author outside the simulation (only possible
    /// for papers that predate it).
    pub alpha_author: Option<AgentId>,
    /// Period of publication; papers that predate the simulation have
    /// `published <= 0`.
    pub published: i32,
    pub citations: u64,
    /// Highest author h index when the paper was published.
    pub max_author_h: u32,
}

impl Paper {
    pub fn age_at(&self, period: i32) -> i32 {
        period - self.published
    }

    pub fn is_alpha_for(&self, agent: AgentId) -> bool {
        self.alpha_author == Some(agent)
    }
}

/// A simulated scientist.
#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub id: AgentId,
    pub papers: Vec<PaperId>,
    /// h index at period 0; never changes afterwards.
    pub initial_h: u32,
    pub h: u32,
    pub h_alpha: u32,
}

impl Agent {
    pub fn new(id: AgentId) -> Self {
        Agent {
            id,
            papers: Vec::new(),
            initial_h: 0,
            h: 0,
            h_alpha: 0,
        }
    }
}

/// Largest `h` such that at least `h` of the counts are `>= h`.
pub fn h_index(citations: &[u64]) -> u32 {
    let mut sorted = citations.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    sorted
        .iter()
        .enumerate()
        .take_while(|&(i, &c)| c > i as u64)
        .count() as u32
}

/// The `h` most cited papers, ties broken towards the smaller paper id.
///
/// Panics if `h` is not the h index of the given citation counts.
pub fn h_core(papers: &[(PaperId, u64)], h: u32) -> Vec<PaperId> {
    let mut ranked = papers.to_vec();
    ranked.sort_unstable_by_key(|&(id, c)| (Reverse(c), id));
    let counts: Vec<u64> = ranked.iter().map(|&(_, c)| c).collect();
    check_core_consistency(&counts, h);
    ranked.truncate(h as usize);
    ranked.into_iter().map(|(id, _)| id).collect()
}

fn check_core_consistency(ranked: &[u64], h: u32) {
    let h = h as usize;
    assert!(h <= ranked.len(), "h = {h} exceeds paper count {}", ranked.len());
    if h > 0 {
        assert!(ranked[h - 1] >= h as u64, "h = {h} inconsistent with citations");
    }
    if let Some(&next) = ranked.get(h) {
        assert!(next <= h as u64, "h = {h} is not maximal");
    }
}

/// Number of h-core papers whose alpha author is `agent`.
///
/// `papers` holds `(id, citations, alpha_author)` for every paper of the agent.
pub fn h_alpha(agent: AgentId, papers: &[(PaperId, u64, Option<AgentId>)], h: u32) -> u32 {
    let pairs: Vec<(PaperId, u64)> = papers.iter().map(|&(id, c, _)| (id, c)).collect();
    let core = h_core(&pairs, h);
    papers
        .iter()
        .filter(|(id, _, alpha)| *alpha == Some(agent) && core.contains(id))
        .count() as u32
}

/// Computes `(h, h_alpha)` for `agent` from its papers in one pass.
pub fn indices_for<'a>(agent: AgentId, papers: impl IntoIterator<Item = &'a Paper>) -> (u32, u32) {
    let mut ranked: Vec<(u64, PaperId, bool)> = papers
        .into_iter()
        .map(|p| (p.citations, p.id, p.is_alpha_for(agent)))
        .collect();
    ranked.sort_unstable_by_key(|&(c, id, _)| (Reverse(c), id));
    let h = ranked
        .iter()
        .enumerate()
        .take_while(|&(i, &(c, _, _))| c > i as u64)
        .count();
    let h_alpha = ranked[..h].iter().filter(|&&(_, _, alpha)| alpha).count();
    (h as u32, h_alpha as u32)
}

/// The author with the highest h index; ties go to the smallest agent id.
///
/// Panics if `authors` is empty.
pub fn determine_alpha_author(authors: &[AgentId], h_of: impl Fn(AgentId) -> u32) -> AgentId {
    *authors
        .iter()
        .max_by_key(|&&id| (h_of(id), Reverse(id)))
        .expect("a paper needs at least one author")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn brute_h(citations: &[u64]) -> u32 {
        (0..=citations.len() as u64)
            .filter(|&h| citations.iter().filter(|&&c| c >= h).count() as u64 >= h)
            .max()
            .unwrap() as u32
    }

    fn ids(raw: &[u32]) -> Vec<PaperId> {
        raw.iter().map(|&i| PaperId(i)).collect()
    }

    #[test]
    fn h_index_examples() {
        assert_eq!(h_index(&[6, 5, 3, 1, 0]), 3);
        assert_eq!(h_index(&[]), 0);
        assert_eq!(h_index(&[10, 10, 10]), 3);
        assert_eq!(h_index(&[0, 0]), 0);
    }

    #[test]
    fn h_core_examples() {
        let (a, b, c, d) = (PaperId(0), PaperId(1), PaperId(2), PaperId(3));
        assert_eq!(h_core(&[(a, 6), (b, 5), (c, 3), (d, 1)], 3), vec![a, b, c]);
        assert_eq!(h_core(&[(d, 3), (c, 3), (b, 3), (a, 3)], 3), vec![a, b, c]);
        assert_eq!(h_core(&[], 0), Vec::<PaperId>::new());
    }

    #[test]
    #[should_panic]
    fn h_core_rejects_inconsistent_h() {
        h_core(&[(PaperId(0), 1), (PaperId(1), 1)], 2);
    }

    #[test]
    #[should_panic]
    fn h_core_rejects_non_maximal_h() {
        h_core(&[(PaperId(0), 5), (PaperId(1), 5)], 1);
    }

    #[test]
    fn h_alpha_examples() {
        let me = AgentId(0);
        let other = Some(AgentId(1));
        let cites = [6, 5, 3, 1, 0];
        let flags = [true, false, true, false, false];
        let papers: Vec<_> = cites
            .iter()
            .zip(flags)
            .enumerate()
            .map(|(i, (&c, f))| (PaperId(i as u32), c, if f { Some(me) } else { other }))
            .collect();
        assert_eq!(h_alpha(me, &papers, 3), 2);

        let all: Vec<_> = papers.iter().map(|&(id, c, _)| (id, c, Some(me))).collect();
        assert_eq!(h_alpha(me, &all, 3), 3);
        let none: Vec<_> = papers.iter().map(|&(id, c, _)| (id, c, None)).collect();
        assert_eq!(h_alpha(me, &none, 3), 0);
    }

    #[test]
    fn alpha_author_examples() {
        let h: HashMap<AgentId, u32> = [(AgentId(0), 3), (AgentId(1), 9), (AgentId(2), 5)].into();
        let lookup = |id| h[&id];
        assert_eq!(determine_alpha_author(&[AgentId(0), AgentId(1), AgentId(2)], lookup), AgentId(1));
        let tied = |_| 5;
        assert_eq!(determine_alpha_author(&[AgentId(4), AgentId(2)], tied), AgentId(2));
        assert_eq!(determine_alpha_author(&[AgentId(7)], |_| 0), AgentId(7));
    }

    #[test]
    #[should_panic]
    fn alpha_author_needs_authors() {
        determine_alpha_author(&[], |_| 0);
    }

    #[test]
    fn h_index_matches_brute_force_on_ten_thousand_vectors() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xC0FFEE);
        for _ in 0..10_000 {
            let len = rng.random_range(0..=50);
            let v: Vec<u64> = (0..len).map(|_| rng.random_range(0..=100)).collect();
            assert_eq!(h_index(&v), brute_h(&v), "{v:?}");
        }
    }

    #[test]
    fn h_alpha_drops_when_a_non_alpha_paper_overtakes() {
        // Frozen alpha credit does not make h-alpha monotone: the h-core is the
        // top h papers, so a cited-up co-authored paper can push out an alpha one.
        let me = AgentId(0);
        let mut papers = build(&[(2, Some(0)), (5, Some(1)), (1, Some(1))]);
        assert_eq!(indices_for(me, &papers), (2, 1));
        papers[2].citations = 11;
        assert_eq!(indices_for(me, &papers), (2, 0));
    }

    #[test]
    fn tie_break_is_input_order_independent() {
        let papers = [(PaperId(5), 4), (PaperId(2), 4), (PaperId(9), 4), (PaperId(1), 2)];
        let mut reversed = papers;
        reversed.reverse();
        assert_eq!(h_core(&papers, 3), ids(&[2, 5, 9]));
        assert_eq!(h_core(&reversed, 3), ids(&[2, 5, 9]));
    }

    fn arb_papers() -> impl Strategy<Value = Vec<(u64, Option<u32>)>> {
        prop::collection::vec((0u64..60, prop::option::of(0u32..3)), 0..40)
    }

    fn build(raw: &[(u64, Option<u32>)]) -> Vec<Paper> {
        raw.iter()
            .enumerate()
            .map(|(i, &(c, alpha))| Paper {
                id: PaperId(i as u32),
                authors: vec![AgentId(0)],
                alpha_author: alpha.map(AgentId),
                published: 0,
                citations: c,
                max_author_h: 0,
            })
            .collect()
    }

    proptest! {
        #[test]
        fn h_matches_brute_force(v in prop::collection::vec(0u64..100, 0..50)) {
            prop_assert_eq!(h_index(&v), brute_h(&v));
        }

        #[test]
        fn indicator_bounds(raw in arb_papers()) {
            let papers = build(&raw);
            let (h, ha) = indices_for(AgentId(0), &papers);
            prop_assert!(ha <= h);
            prop_assert!(h as usize <= papers.len());
            let cites: Vec<u64> = papers.iter().map(|p| p.citations).collect();
            prop_assert_eq!(h, h_index(&cites));
            let triples: Vec<_> = papers.iter().map(|p| (p.id, p.citations, p.alpha_author)).collect();
            prop_assert_eq!(ha, h_alpha(AgentId(0), &triples, h));
        }

        #[test]
        fn core_has_exactly_h_members(v in prop::collection::vec(0u64..30, 0..40)) {
            let h = h_index(&v);
            let pairs: Vec<_> = v.iter().enumerate().map(|(i, &c)| (PaperId(i as u32), c)).collect();
            let core = h_core(&pairs, h);
            prop_assert_eq!(core.len(), h as usize);
            prop_assert!(core.iter().all(|id| v[id.index()] >= u64::from(h)));
        }

        #[test]
        fn adding_citations_never_lowers_h(
            v in prop::collection::vec(0u64..30, 1..40),
            pick in any::<prop::sample::Index>(),
            extra in 0u64..20,
        ) {
            let mut bumped = v.clone();
            bumped[pick.index(v.len())] += extra;
            prop_assert!(h_index(&bumped) >= h_index(&v));
        }

        #[test]
        fn alpha_author_is_permutation_invariant(
            hs in prop::collection::vec(0u32..10, 1..8),
            seed in any::<u64>(),
        ) {
            use rand::{seq::SliceRandom, SeedableRng};
            let authors: Vec<AgentId> = (0..hs.len() as u32).map(AgentId).collect();
            let lookup = |id: AgentId| hs[id.index()];
            let mut shuffled = authors.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(
                determine_alpha_author(&authors, lookup),
                determine_alpha_author(&shuffled, lookup)
            );
        }
    }
}
