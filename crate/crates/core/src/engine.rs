//! Discrete-time simulation of collaborating, publishing and cited agents.
//!
//! A run starts from [`init_state`], then repeats [`step_period`] for the
//! configured number of periods. [`run_experiment`] executes independent runs
//! in parallel; every run draws from its own ChaCha stream derived from
//! `(master_seed, run_index)`, so results do not depend on scheduling.

use std::cmp::Reverse;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::distributions::{AgingCurve, CitationModel, CountDistribution, CountKind};
use crate::model::{determine_alpha_author, indices_for, Agent, AgentId, Paper, PaperId};
use crate::{Error, Result};

/// Pre-simulation papers are between one and this many periods old.
pub const MAX_INITIAL_AGE: u32 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub runs: u32,
    pub agents: u32,
    pub periods: u32,
    /// Team size used when chunking collaborators.
    pub coauthors: u32,
    pub initial_papers: CountDistribution,
    pub citations: CitationModel,
    /// Probability that a pre-simulation paper has its agent as alpha author.
    pub alpha_share: f64,
    /// Share of agents that collaborate in a period.
    pub collab_share: f64,
    /// Correlation between initial h and the chance of collaborating.
    pub diligence_correlation: f64,
    pub strategic: bool,
    pub self_citation: bool,
    /// Extra citations as a multiple of the paper's highest author h at
    /// publication. Zero disables the boost.
    pub boost_size: f64,
    pub boost_schedule: BoostSchedule,
    /// Reassign alpha authors from current h values after every period.
    pub dynamic_alpha: bool,
    pub master_seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        let curve = AgingCurve::new(3.0, 5.0, 2.0).expect("valid default curve");
        SimulationConfig {
            runs: 50,
            agents: 200,
            periods: 20,
            coauthors: 3,
            initial_papers: CountDistribution::poisson(10.0).expect("valid default"),
            citations: CitationModel {
                kind: CountKind::Poisson,
                curve,
            },
            alpha_share: 0.33,
            collab_share: 1.0,
            diligence_correlation: 0.0,
            strategic: false,
            self_citation: false,
            boost_size: 0.0,
            boost_schedule: BoostSchedule::Once,
            dynamic_alpha: false,
            master_seed: 0,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("runs", self.runs),
            ("agents", self.agents),
            ("periods", self.periods),
            ("coauthors", self.coauthors),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(Error::config(format!("{name} must be positive")));
            }
        }
        if !(0.0..=1.0).contains(&self.alpha_share) {
            return Err(Error::config(format!(
                "alpha share must lie in [0, 1], got {}",
                self.alpha_share
            )));
        }
        if !(self.collab_share > 0.0 && self.collab_share <= 1.0) {
            return Err(Error::config(format!(
                "collaboration share must lie in (0, 1], got {}",
                self.collab_share
            )));
        }
        if !(0.0..=1.0).contains(&self.diligence_correlation) {
            return Err(Error::config(format!(
                "diligence correlation must lie in [0, 1], got {}",
                self.diligence_correlation
            )));
        }
        if !(self.boost_size.is_finite() && self.boost_size >= 0.0) {
            return Err(Error::config(format!(
                "boost size must be nonnegative, got {}",
                self.boost_size
            )));
        }
        self.citations.kind.validate()?;
        Ok(())
    }

    /// Settings that are valid but have no effect.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.diligence_correlation > 0.0 && self.collab_share >= 1.0 {
            out.push(
                "diligence correlation has no effect while every agent collaborates (share = 1)"
                    .to_owned(),
            );
        }
        out
    }
}

/// When boost citations are granted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoostSchedule {
    /// Once, in the paper's first citation period (age 1).
    #[default]
    Once,
    /// In every citation period.
    EveryPeriod,
}

impl BoostSchedule {
    pub fn applies_at(self, age: i32) -> bool {
        match self {
            BoostSchedule::Once => age == 1,
            BoostSchedule::EveryPeriod => age >= 1,
        }
    }
}

/// The random stream for one run.
pub fn run_rng(master_seed: u64, run_index: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(u64::from(run_index));
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgentMetrics {
    pub id: AgentId,
    pub h: u32,
    pub h_alpha: u32,
    pub papers: u32,
}

/// Every agent's indicators at the end of one period of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodMetrics {
    pub run_index: u32,
    /// 0 for the initial state, then 1..=periods.
    pub period: u32,
    pub agents: Vec<AgentMetrics>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub run_index: u32,
    pub initial: PeriodMetrics,
    pub periods: Vec<PeriodMetrics>,
}

impl RunResult {
    pub fn initial_h(&self) -> Vec<u32> {
        self.initial.agents.iter().map(|a| a.h).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SimulationState {
    pub run_index: u32,
    pub period: i32,
    pub agents: Vec<Agent>,
    pub papers: Vec<Paper>,
    /// Diligence propensity per agent; drawn on first use.
    pub diligence: Vec<f64>,
    pub rng: ChaCha8Rng,
}

impl SimulationState {
    pub fn agent(&self, id: AgentId) -> &Agent {
        &self.agents[id.index()]
    }

    pub fn papers_of(&self, id: AgentId) -> impl Iterator<Item = &Paper> + '_ {
        self.agent(id).papers.iter().map(|p| &self.papers[p.index()])
    }

    pub fn metrics(&self) -> PeriodMetrics {
        PeriodMetrics {
            run_index: self.run_index,
            period: self.period.max(0) as u32,
            agents: self
                .agents
                .iter()
                .map(|a| AgentMetrics {
                    id: a.id,
                    h: a.h,
                    h_alpha: a.h_alpha,
                    papers: a.papers.len() as u32,
                })
                .collect(),
        }
    }

    /// Recomputes every agent's h and h-alpha from current citations and
    /// alpha assignments.
    pub fn refresh_indices(&mut self) {
        for i in 0..self.agents.len() {
            let id = self.agents[i].id;
            let (h, h_alpha) = indices_for(id, self.papers_of(id));
            let agent = &mut self.agents[i];
            agent.h = h;
            agent.h_alpha = h_alpha;
        }
    }
}

/// Builds the period-0 state of run `run_index`: agents with a back
/// catalogue of solo papers aged one to [`MAX_INITIAL_AGE`] periods.
pub fn init_state(config: &SimulationConfig, run_index: u32) -> Result<SimulationState> {
    config.validate()?;
    let mut rng = run_rng(config.master_seed, run_index);
    let mut agents = Vec::with_capacity(config.agents as usize);
    let mut papers = Vec::new();

    for i in 0..config.agents {
        let id = AgentId(i);
        let mut agent = Agent::new(id);
        let count = config.initial_papers.sample(&mut rng);
        for _ in 0..count {
            let age = rng.random_range(1..=MAX_INITIAL_AGE);
            let is_alpha = rng.random_bool(config.alpha_share);
            let citations = (1..=age)
                .map(|a| config.citations.sample_for_age(a, &mut rng))
                .sum();
            let paper_id = PaperId(papers.len() as u32);
            papers.push(Paper {
                id: paper_id,
                authors: vec![id],
                alpha_author: is_alpha.then_some(id),
                published: -(age as i32),
                citations,
                max_author_h: 0,
            });
            agent.papers.push(paper_id);
        }
        agents.push(agent);
    }

    let mut state = SimulationState {
        run_index,
        period: 0,
        agents,
        papers,
        diligence: Vec::new(),
        rng,
    };
    state.refresh_indices();
    for agent in &mut state.agents {
        agent.initial_h = agent.h;
    }
    for paper in &mut state.papers {
        paper.max_author_h = state.agents[paper.authors[0].index()].initial_h;
    }
    Ok(state)
}

/// Mid-ranks of `values`, standardized to mean 0 and unit variance.
fn standardized_ranks(values: &[u32]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| values[i]);
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end + 1 < n && values[order[end + 1]] == values[order[start]] {
            end += 1;
        }
        let mid = (start + end) as f64 / 2.0 + 1.0;
        for &i in &order[start..=end] {
            ranks[i] = mid;
        }
        start = end + 1;
    }
    let mean = ranks.iter().sum::<f64>() / n as f64;
    let sd = (ranks.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    if sd == 0.0 {
        return vec![0.0; n];
    }
    ranks.iter().map(|r| (r - mean) / sd).collect()
}

/// Persistent diligence propensity `ρ·z + √(1−ρ²)·η` per agent, where z is
/// the standardized rank of initial h and η is standard normal. Its
/// correlation with initial h is ρ.
pub fn draw_diligence<R: Rng + ?Sized>(initial_h: &[u32], rho: f64, rng: &mut R) -> Vec<f64> {
    let noise = (1.0 - rho * rho).sqrt();
    standardized_ranks(initial_h)
        .into_iter()
        .map(|z| {
            let eta: f64 = rng.sample(StandardNormal);
            rho * z + noise * eta
        })
        .collect()
}

/// Picks the agents that collaborate this period, returned in id order.
///
/// Without diligence correlation this is a uniform random subset. Otherwise
/// agents are ranked by their diligence propensity plus fresh standard normal
/// noise and the top scores are selected, so the per-period chance of
/// publishing rises monotonically with propensity.
pub fn select_collaborators(state: &mut SimulationState, config: &SimulationConfig) -> Vec<AgentId> {
    let n = state.agents.len();
    let count = ((config.collab_share * n as f64).round() as usize).min(n);
    if count == n {
        return state.agents.iter().map(|a| a.id).collect();
    }

    let mut picked: Vec<AgentId> = if config.diligence_correlation == 0.0 {
        rand::seq::index::sample(&mut state.rng, n, count)
            .into_iter()
            .map(|i| AgentId(i as u32))
            .collect()
    } else {
        if state.diligence.len() != n {
            let initial: Vec<u32> = state.agents.iter().map(|a| a.initial_h).collect();
            state.diligence = draw_diligence(&initial, config.diligence_correlation, &mut state.rng);
        }
        let mut scored: Vec<(f64, AgentId)> = state
            .diligence
            .iter()
            .zip(&state.agents)
            .map(|(&propensity, agent)| {
                let eps: f64 = state.rng.sample(StandardNormal);
                (propensity + eps, agent.id)
            })
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        scored.into_iter().take(count).map(|(_, id)| id).collect()
    };
    picked.sort_unstable();
    picked
}

/// Partitions the collaborators into teams of `coauthors` members, with one
/// smaller team for any remainder.
///
/// In strategic mode each team is led by one of the `k` highest-h
/// collaborators (`k` = team count, ties by id) and the rest are dealt out at
/// random, so no team holds two of those leaders.
pub fn form_teams(
    collaborators: &[AgentId],
    config: &SimulationConfig,
    state: &mut SimulationState,
) -> Vec<Vec<AgentId>> {
    if collaborators.is_empty() {
        return Vec::new();
    }
    let size = config.coauthors as usize;
    let mut pool = collaborators.to_vec();

    if !config.strategic {
        pool.shuffle(&mut state.rng);
        return pool.chunks(size).map(<[AgentId]>::to_vec).collect();
    }

    let team_count = pool.len().div_ceil(size);
    pool.sort_by_key(|&id| (Reverse(state.agent(id).h), id));
    let mut rest = pool.split_off(team_count);
    rest.shuffle(&mut state.rng);

    let last_size = pool.len() + rest.len() - size * (team_count - 1);
    let mut rest = rest.into_iter();
    pool.into_iter()
        .enumerate()
        .map(|(i, leader)| {
            let capacity = if i + 1 == team_count { last_size } else { size };
            let mut team = Vec::with_capacity(capacity);
            team.push(leader);
            team.extend(rest.by_ref().take(capacity - 1));
            team
        })
        .collect()
}

/// Appends one uncited paper per team, credited to the member with the
/// highest current h.
pub fn publish(teams: &[Vec<AgentId>], state: &mut SimulationState) -> Vec<PaperId> {
    let mut created = Vec::with_capacity(teams.len());
    for team in teams {
        let agents = &state.agents;
        let alpha = determine_alpha_author(team, |id| agents[id.index()].h);
        let max_author_h = agents[alpha.index()].h;
        let id = PaperId(state.papers.len() as u32);
        state.papers.push(Paper {
            id,
            authors: team.clone(),
            alpha_author: Some(alpha),
            published: state.period,
            citations: 0,
            max_author_h,
        });
        for member in team {
            state.agents[member.index()].papers.push(id);
        }
        created.push(id);
    }
    created
}

/// Extra citations per period from the boost: `round(h · size)`, half away
/// from zero.
pub fn boost_citations(max_author_h: u32, boost_size: f64) -> u64 {
    if boost_size <= 0.0 {
        return 0;
    }
    (f64::from(max_author_h) * boost_size).round() as u64
}

/// True when some author's h exceeds the paper's citations by one or two.
pub fn qualifies_for_self_citation(paper: &Paper, agents: &[Agent]) -> bool {
    paper.authors.iter().any(|a| {
        let h = u64::from(agents[a.index()].h);
        h > paper.citations && h - paper.citations <= 2
    })
}

/// Adds this period's citations to every paper at least one period old.
pub fn cite_papers(state: &mut SimulationState, config: &SimulationConfig) {
    let SimulationState {
        period,
        agents,
        papers,
        rng,
        ..
    } = state;
    for paper in papers.iter_mut() {
        let age = paper.age_at(*period);
        if age < 1 {
            continue;
        }
        let self_cite = config.self_citation && qualifies_for_self_citation(paper, agents);
        let drawn = config.citations.sample_for_age(age as u32, rng);
        let boost = if config.boost_schedule.applies_at(age) {
            boost_citations(paper.max_author_h, config.boost_size)
        } else {
            0
        };
        paper.citations += drawn + boost + u64::from(self_cite);
    }
}

/// Credits every paper written during the simulation to its author with the
/// highest current h. Pre-simulation papers keep their original credit.
pub fn reassign_alpha_authors(state: &mut SimulationState) {
    let SimulationState { agents, papers, .. } = state;
    for paper in papers.iter_mut().filter(|p| p.published >= 1) {
        paper.alpha_author = Some(determine_alpha_author(&paper.authors, |id| {
            agents[id.index()].h
        }));
    }
}

/// What happened during one period, for invariant checking.
#[derive(Debug, Clone)]
pub struct PeriodTrace {
    /// h of every agent before the period started.
    pub pre_h: Vec<u32>,
    pub collaborators: Vec<AgentId>,
    pub teams: Vec<Vec<AgentId>>,
    pub new_papers: Vec<PaperId>,
    pub metrics: PeriodMetrics,
}

pub fn step_period_traced(state: &mut SimulationState, config: &SimulationConfig) -> PeriodTrace {
    state.period += 1;
    let pre_h = state.agents.iter().map(|a| a.h).collect();
    let collaborators = select_collaborators(state, config);
    let teams = form_teams(&collaborators, config, state);
    let new_papers = publish(&teams, state);
    cite_papers(state, config);
    state.refresh_indices();
    if config.dynamic_alpha {
        reassign_alpha_authors(state);
        state.refresh_indices();
    }
    PeriodTrace {
        pre_h,
        collaborators,
        teams,
        new_papers,
        metrics: state.metrics(),
    }
}

/// Advances one period: collaborate, publish, cite, then recompute indices.
pub fn step_period(state: &mut SimulationState, config: &SimulationConfig) -> PeriodMetrics {
    step_period_traced(state, config).metrics
}

pub fn run_single(config: &SimulationConfig, run_index: u32) -> Result<RunResult> {
    let mut state = init_state(config, run_index)?;
    let initial = state.metrics();
    let periods = (0..config.periods)
        .map(|_| step_period(&mut state, config))
        .collect();
    Ok(RunResult {
        run_index,
        initial,
        periods,
    })
}

/// Runs all `config.runs` repetitions on the global rayon pool. Results are
/// ordered by run index.
pub fn run_experiment(config: &SimulationConfig) -> Result<Vec<RunResult>> {
    config.validate()?;
    (0..config.runs)
        .into_par_iter()
        .map(|i| run_single(config, i))
        .collect()
}

/// Same as [`run_experiment`], on a dedicated pool of `threads` workers.
pub fn run_experiment_with_threads(
    config: &SimulationConfig,
    threads: usize,
) -> Result<Vec<RunResult>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config(format!("cannot build thread pool: {e}")))?;
    pool.install(|| run_experiment(config))
}
