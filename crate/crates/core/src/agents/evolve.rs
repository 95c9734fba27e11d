use std::cmp::Ordering;

use rand::Rng;

use super::bmrh::TieBreak;

/// Where a candidate comes from.
pub(crate) enum Origin<'a, G> {
    Fresh,
    /// Last turn's best, shifted by one step.
    Shifted(&'a G),
    Child(&'a G),
}

/// A built and evaluated candidate. `complete` is false when the budget ran
/// out before it was fully simulated.
pub(crate) struct Built<G> {
    pub genome: G,
    pub fitness: f64,
    pub complete: bool,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Schedule {
    pub population: usize,
    pub elites: usize,
    pub offspring: usize,
    pub tie_break: TieBreak,
}

struct Member<G> {
    genome: G,
    fitness: f64,
    key: u64,
}

fn rank<G>(pop: &mut [Member<G>]) {
    pop.sort_by(|a, b| b.fitness.partial_cmp(&a.fitness).unwrap_or(Ordering::Equal).then(a.key.cmp(&b.key)));
}

/// (μ+λ) loop without crossover: elites breed, parents and children compete
/// for the next population, nothing is re-evaluated. Runs until `make`
/// reports an incomplete build, then returns the best genome seen.
pub(crate) fn evolve<G, R, F>(sched: Schedule, shifted: Option<&G>, rng: &mut R, mut make: F) -> Option<G>
where
    R: Rng + ?Sized,
    F: FnMut(Origin<'_, G>, &mut R) -> Built<G>,
{
    let mut pop: Vec<Member<G>> = Vec::with_capacity(sched.population + sched.elites * sched.offspring);
    let mut partial: Option<G> = None;
    let mut counter = 0u64;
    let mut key = |rng: &mut R| {
        counter += 1;
        match sched.tie_break {
            TieBreak::First => counter,
            TieBreak::Randomized => rng.gen(),
        }
    };

    let mut admit = |b: Built<G>, pop: &mut Vec<Member<G>>, rng: &mut R, partial: &mut Option<G>| -> bool {
        if b.complete {
            let k = key(rng);
            pop.push(Member { genome: b.genome, fitness: b.fitness, key: k });
            true
        } else {
            if partial.is_none() {
                *partial = Some(b.genome);
            }
            false
        }
    };

    let mut running = true;
    if let Some(prev) = shifted {
        let b = make(Origin::Shifted(prev), rng);
        running = admit(b, &mut pop, rng, &mut partial);
    }
    while running && pop.len() < sched.population {
        let b = make(Origin::Fresh, rng);
        running = admit(b, &mut pop, rng, &mut partial);
    }
    while running {
        rank(&mut pop);
        let parents = sched.elites.min(pop.len());
        let mut children = Vec::with_capacity(parents * sched.offspring);
        'breed: for p in 0..parents {
            for _ in 0..sched.offspring {
                let b = make(Origin::Child(&pop[p].genome), rng);
                if !admit(b, &mut children, rng, &mut partial) {
                    running = false;
                    break 'breed;
                }
            }
        }
        pop.extend(children);
        rank(&mut pop);
        pop.truncate(sched.population);
    }
    rank(&mut pop);
    match pop.into_iter().next() {
        Some(m) => Some(m.genome),
        None => partial,
    }
}
