//! Pairwise comparison of saved runs.
//!
//! Every ordered pair of methods gets a verdict triple: closed (normal
//! intervals), open (Student intervals) and paired (Student interval on the
//! per-task differences against zero). A component is unavailable when its
//! precondition does not hold: unpaired verdicts need the same pool and task
//! shape, paired verdicts need the exact same task list.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifest::RunManifest;
use crate::stats::{
    compare_intervals, normal_ci, paired_ci, paired_series, paired_verdict, student_ci, AccuracySeries, Symbol,
    VerdictMode,
};

/// Verdict triple for row method vs column method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictCell {
    pub closed: Option<Symbol>,
    pub open: Option<Symbol>,
    pub paired: Option<Symbol>,
}

impl VerdictCell {
    pub fn flipped(self) -> Self {
        VerdictCell {
            closed: self.closed.map(Symbol::flipped),
            open: self.open.map(Symbol::flipped),
            paired: self.paired.map(Symbol::flipped),
        }
    }

    pub fn get(&self, mode: VerdictMode) -> Option<Symbol> {
        match mode {
            VerdictMode::Closed => self.closed,
            VerdictMode::Open => self.open,
            VerdictMode::Paired => self.paired,
        }
    }

    fn any(&self) -> bool {
        self.closed.is_some() || self.open.is_some() || self.paired.is_some()
    }

    /// Three characters, `.` for an unavailable component.
    pub fn render(&self) -> String {
        [self.closed, self.open, self.paired]
            .iter()
            .map(|s| s.map_or('.', Symbol::as_char))
            .collect()
    }
}

/// Square matrix of verdict triples; the diagonal is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceMatrix {
    pub methods: Vec<String>,
    pub p_limit: f64,
    pub cells: Vec<Vec<Option<VerdictCell>>>,
}

impl SignificanceMatrix {
    pub fn len(&self) -> usize {
        self.methods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.methods.is_empty()
    }

    pub fn cell(&self, row: usize, col: usize) -> Option<&VerdictCell> {
        self.cells[row][col].as_ref()
    }

    /// Diagonal empty, and `cell(j, i)` is `cell(i, j)` with signs flipped.
    pub fn is_antisymmetric(&self) -> bool {
        let n = self.len();
        self.cells.len() == n
            && self.cells.iter().all(|r| r.len() == n)
            && (0..n).all(|i| {
                self.cells[i][i].is_none()
                    && (0..n).all(|j| i == j || self.cells[j][i] == self.cells[i][j].map(VerdictCell::flipped))
            })
    }

    /// Upper-triangle cells `(row, col, cell)` with `row < col`.
    pub fn upper_cells(&self) -> impl Iterator<Item = (usize, usize, &VerdictCell)> + '_ {
        let n = self.len();
        (0..n).flat_map(move |i| (i + 1..n).filter_map(move |j| self.cell(i, j).map(|c| (i, j, c))))
    }
}

/// Builds the significance matrix of a set of runs.
pub fn compare_runs(manifests: &[RunManifest], p_limit: f64) -> Result<SignificanceMatrix> {
    crate::stats::quantiles::check_p_limit(p_limit)?;
    let n = manifests.len();
    if n < 2 {
        return Err(Error::NoComparablePairs(n));
    }
    let mut methods: Vec<String> = Vec::with_capacity(n);
    for m in manifests {
        m.validate()?;
        if methods.contains(&m.method_id) {
            return Err(Error::Config(format!("method id `{}` appears twice", m.method_id)));
        }
        methods.push(m.method_id.clone());
    }
    let series: Vec<AccuracySeries> = manifests
        .iter()
        .map(|m| Ok(AccuracySeries::new(m.accuracies.clone())?.with_task_set_hash(m.task_set_hash.clone())))
        .collect::<Result<_>>()?;
    let closed: Vec<_> = series.iter().map(|s| normal_ci(s, p_limit).ok()).collect();
    let open: Vec<_> = series.iter().map(|s| student_ci(s, p_limit).ok()).collect();

    let mut cells = vec![vec![None; n]; n];
    let mut comparable = false;
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&manifests[i], &manifests[j]);
            let same_setting = a.pool_id == b.pool_id && same_shape(a, b);
            let unpaired = |cis: &[Option<crate::stats::IntervalEstimate>]| -> Result<Option<Symbol>> {
                match (same_setting, &cis[i], &cis[j]) {
                    (true, Some(x), Some(y)) => Ok(Some(compare_intervals(x, y)?.symbol)),
                    _ => Ok(None),
                }
            };
            let paired = if a.task_set_hash == b.task_set_hash && a.tasks.len() >= 2 {
                let ps = paired_series(&series[i], &series[j])?;
                Some(paired_verdict(&paired_ci(&ps, p_limit)?).symbol)
            } else {
                None
            };
            let cell = VerdictCell {
                closed: unpaired(&closed)?,
                open: unpaired(&open)?,
                paired,
            };
            comparable |= cell.any();
            cells[i][j] = Some(cell);
            cells[j][i] = Some(cell.flipped());
        }
    }
    if !comparable {
        return Err(Error::NoComparablePairs(n));
    }
    Ok(SignificanceMatrix {
        methods,
        p_limit,
        cells,
    })
}

fn same_shape(a: &RunManifest, b: &RunManifest) -> bool {
    (a.spec.ways, a.spec.shots, a.spec.queries) == (b.spec.ways, b.spec.shots, b.spec.queries)
}

/// Two verdict modes reaching opposite conclusive answers on the same pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inversion {
    pub matrix: usize,
    pub row: String,
    pub col: String,
    pub first: (VerdictMode, Symbol),
    pub second: (VerdictMode, Symbol),
}

/// Conclusive-verdict counts over the upper triangle of one or more matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConclusivenessReport {
    /// Pairs examined (upper-triangle cells).
    pub comparisons: usize,
    pub closed: usize,
    pub open: usize,
    pub paired: usize,
    pub inversions: Vec<Inversion>,
    /// Set when fewer paired than open verdicts are conclusive, which happens
    /// when per-task accuracies are negatively correlated.
    pub paired_below_open: bool,
}

pub fn conclusiveness_report(matrices: &[SignificanceMatrix]) -> ConclusivenessReport {
    let mut r = ConclusivenessReport {
        comparisons: 0,
        closed: 0,
        open: 0,
        paired: 0,
        inversions: Vec::new(),
        paired_below_open: false,
    };
    let count = |s: Option<Symbol>| usize::from(s.is_some_and(Symbol::is_conclusive));
    for (mi, m) in matrices.iter().enumerate() {
        for (i, j, cell) in m.upper_cells() {
            r.comparisons += 1;
            r.closed += count(cell.closed);
            r.open += count(cell.open);
            r.paired += count(cell.paired);
            let modes = [VerdictMode::Closed, VerdictMode::Open, VerdictMode::Paired];
            for (x, &mx) in modes.iter().enumerate() {
                for &my in &modes[x + 1..] {
                    if let (Some(sx), Some(sy)) = (cell.get(mx), cell.get(my)) {
                        if sx.is_conclusive() && sy == sx.flipped() {
                            r.inversions.push(Inversion {
                                matrix: mi,
                                row: m.methods[i].clone(),
                                col: m.methods[j].clone(),
                                first: (mx, sx),
                                second: (my, sy),
                            });
                        }
                    }
                }
            }
        }
    }
    r.paired_below_open = r.paired < r.open;
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::SamplingMode;
    use crate::task::{Task, TaskSpec};

    fn tasks(n: usize, offset: usize) -> Vec<Task> {
        (0..n)
            .map(|t| Task {
                class_subset: vec![0, 1],
                support: vec![vec![t + offset], vec![t + offset]],
                query: vec![vec![1000 + t], vec![1000 + t]],
            })
            .collect()
    }

    fn manifest(id: &str, acc: Vec<f64>, offset: usize) -> RunManifest {
        let n = acc.len();
        RunManifest::new(
            1,
            TaskSpec::new(2, 1, 1).with_task_count(n),
            SamplingMode::WithReplacement,
            id,
            "pool",
            tasks(n, offset),
            acc,
        )
        .unwrap()
    }

    #[test]
    fn constant_shift_is_paired_conclusive() {
        let a: Vec<f64> = (0..20).map(|i| [0.25, 0.5, 0.75][i % 3]).collect();
        let b: Vec<f64> = a.iter().map(|x| x + 0.125).collect();
        let m = compare_runs(&[manifest("a", a.clone(), 0), manifest("b", b, 0)], 0.95).unwrap();
        let cell = m.cell(0, 1).unwrap();
        assert_eq!(cell.paired, Some(Symbol::Minus));
        assert_eq!(cell.closed, Some(Symbol::Zero));
        let ps = paired_series(
            &AccuracySeries::new(a.clone()).unwrap(),
            &AccuracySeries::new(a.iter().map(|x| x + 0.125).collect()).unwrap(),
        )
        .unwrap();
        assert_eq!(paired_ci(&ps, 0.95).unwrap().half_width, 0.0);
        assert!(m.is_antisymmetric());
    }

    #[test]
    fn self_comparison_is_all_zero() {
        let a = vec![0.5, 1.0, 0.0, 0.5];
        let m = compare_runs(&[manifest("a", a.clone(), 0), manifest("a2", a, 0)], 0.95).unwrap();
        let z = Some(Symbol::Zero);
        assert_eq!(
            *m.cell(0, 1).unwrap(),
            VerdictCell {
                closed: z,
                open: z,
                paired: z
            }
        );
    }

    #[test]
    fn paired_needs_identical_tasks() {
        let m = compare_runs(
            &[
                manifest("a", vec![0.5, 1.0, 0.0], 0),
                manifest("b", vec![0.5, 1.0, 0.0], 7),
            ],
            0.95,
        )
        .unwrap();
        assert_eq!(m.cell(0, 1).unwrap().paired, None);
        assert!(m.cell(0, 1).unwrap().closed.is_some());
    }

    #[test]
    fn nothing_comparable() {
        let mut b = manifest("b", vec![0.5, 1.0, 0.0], 7);
        b.pool_id = "other".into();
        assert!(matches!(
            compare_runs(&[manifest("a", vec![0.5, 1.0, 0.0], 0), b], 0.95),
            Err(Error::NoComparablePairs(2))
        ));
        assert!(compare_runs(&[manifest("a", vec![0.5, 1.0], 0)], 0.95).is_err());
    }

    #[test]
    fn report_counts_and_inversions() {
        let cell = VerdictCell {
            closed: Some(Symbol::Plus),
            open: Some(Symbol::Zero),
            paired: Some(Symbol::Minus),
        };
        let m = SignificanceMatrix {
            methods: vec!["a".into(), "b".into()],
            p_limit: 0.95,
            cells: vec![vec![None, Some(cell)], vec![Some(cell.flipped()), None]],
        };
        let r = conclusiveness_report(&[m]);
        assert_eq!((r.comparisons, r.closed, r.open, r.paired), (1, 1, 0, 1));
        assert_eq!(r.inversions.len(), 1);
        assert_eq!(r.inversions[0].first, (VerdictMode::Closed, Symbol::Plus));
        assert_eq!(r.inversions[0].second, (VerdictMode::Paired, Symbol::Minus));

        let zero = VerdictCell {
            closed: Some(Symbol::Zero),
            open: Some(Symbol::Zero),
            paired: Some(Symbol::Zero),
        };
        let m = SignificanceMatrix {
            methods: vec!["a".into(), "b".into()],
            p_limit: 0.95,
            cells: vec![vec![None, Some(zero)], vec![Some(zero), None]],
        };
        let r = conclusiveness_report(&[m]);
        assert_eq!((r.closed, r.open, r.paired), (0, 0, 0));
        assert!(r.inversions.is_empty() && !r.paired_below_open);
    }
}
