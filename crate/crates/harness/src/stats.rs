use std::io::Write;

use crate::HarnessError;

/// Win rate with ties counted as half a win, and the 95% normal
/// approximation half-width.
pub fn ci_bounds(wins: u64, ties: u64, n: u64) -> (f64, f64) {
    assert!(n >= 1, "need at least one game");
    let n = n as f64;
    let p = (wins as f64 + 0.5 * ties as f64) / n;
    (p, 1.96 * (p * (1.0 - p) / n).sqrt())
}

/// Win/tie/loss counts from one side's point of view.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub wins: u64,
    pub ties: u64,
    pub losses: u64,
}

impl Tally {
    /// Adds a game scored 1, 0.5 or 0.
    pub fn add(&mut self, score: f64) {
        if score >= 1.0 {
            self.wins += 1;
        } else if score > 0.0 {
            self.ties += 1;
        } else {
            self.losses += 1;
        }
    }

    pub fn games(&self) -> u64 {
        self.wins + self.ties + self.losses
    }

    /// The other side's view of the same games.
    pub fn flipped(&self) -> Tally {
        Tally { wins: self.losses, ties: self.ties, losses: self.wins }
    }

    pub fn win_rate(&self) -> f64 {
        ci_bounds(self.wins, self.ties, self.games().max(1)).0
    }

    pub fn ci(&self) -> (f64, f64) {
        ci_bounds(self.wins, self.ties, self.games().max(1))
    }
}

/// Pairwise results, row against column.
#[derive(Clone, Debug, PartialEq)]
pub struct WinRateTable {
    pub labels: Vec<String>,
    /// `cells[i][j]` is row `i`'s record against column `j`.
    pub cells: Vec<Vec<Tally>>,
}

impl WinRateTable {
    pub fn new(labels: Vec<String>) -> Self {
        let n = labels.len();
        WinRateTable { labels, cells: vec![vec![Tally::default(); n]; n] }
    }

    /// Records a game between `i` and `j` scored from `i`'s side.
    pub fn record(&mut self, i: usize, j: usize, score: f64) {
        self.cells[i][j].add(score);
        self.cells[j][i].add(1.0 - score);
    }

    /// Win percentage of `i` against `j`.
    pub fn percent(&self, i: usize, j: usize) -> Option<f64> {
        (i != j && self.cells[i][j].games() > 0).then(|| 100.0 * self.cells[i][j].win_rate())
    }

    /// Mean of row `i` over the opponents it met.
    pub fn average(&self, i: usize) -> f64 {
        let row: Vec<f64> = (0..self.labels.len()).filter_map(|j| self.percent(i, j)).collect();
        if row.is_empty() {
            0.0
        } else {
            row.iter().sum::<f64>() / row.len() as f64
        }
    }

    /// Matrix of win percentages with an `avg` column; the diagonal is blank.
    pub fn write_matrix<W: Write>(&self, out: W) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["agent".to_string()];
        header.extend(self.labels.iter().cloned());
        header.push("avg".into());
        w.write_record(&header)?;
        for (i, label) in self.labels.iter().enumerate() {
            let mut row = vec![label.clone()];
            row.extend((0..self.labels.len()).map(|j| self.percent(i, j).map(fmt4).unwrap_or_default()));
            row.push(fmt4(self.average(i)));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// One row per ordered pair with counts and the 95% half-width.
    pub fn write_pairs<W: Write>(&self, out: W) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["agent", "opponent", "games", "wins", "ties", "losses", "win_pct", "ci95_pct"])?;
        for i in 0..self.labels.len() {
            for j in 0..self.labels.len() {
                let t = self.cells[i][j];
                if i == j || t.games() == 0 {
                    continue;
                }
                let (p, hw) = t.ci();
                w.write_record([
                    self.labels[i].clone(),
                    self.labels[j].clone(),
                    t.games().to_string(),
                    t.wins.to_string(),
                    t.ties.to_string(),
                    t.losses.to_string(),
                    fmt4(100.0 * p),
                    fmt4(100.0 * hw),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub fn fmt4(x: f64) -> String {
    format!("{x:.4}")
}

/// Median of a non-empty sample; the mean of the middle pair for even sizes.
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}
