use crate::Scalar;

/// Signals recorded at one sample. Controller columns are `None` in
/// open-loop runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record<T> {
    pub t: T,
    pub bis_true: T,
    pub bis_measured: T,
    pub bis_filtered: Option<T>,
    pub u: T,
    pub c1: T,
    pub c2: T,
    pub c3: T,
    pub ce_true: T,
    pub ce_model: Option<T>,
    pub i_t: Option<T>,
    pub ce_ref: Option<T>,
}

impl<T: Scalar> Record<T> {
    /// All columns in CSV order.
    pub fn columns(&self) -> [Option<T>; 12] {
        [
            Some(self.t),
            Some(self.bis_true),
            Some(self.bis_measured),
            self.bis_filtered,
            Some(self.u),
            Some(self.c1),
            Some(self.c2),
            Some(self.c3),
            Some(self.ce_true),
            self.ce_model,
            self.i_t,
            self.ce_ref,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.columns().iter().flatten().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory<T> {
    pub records: Vec<Record<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub const COLUMNS: [&'static str; 12] = [
        "t_min",
        "bis_true",
        "bis_measured",
        "bis_filtered",
        "u_mg_min",
        "c1",
        "c2",
        "c3",
        "ce_true",
        "ce_model",
        "i_t",
        "ce_ref",
    ];

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&Record<T>> {
        self.records.last()
    }

    /// Strictly increasing time and all values finite.
    pub fn is_well_formed(&self) -> bool {
        self.records.iter().all(Record::is_finite)
            && self.records.windows(2).all(|w| w[0].t < w[1].t)
    }

    /// Record whose time is closest to `t`.
    pub fn at_time(&self, t: T) -> Option<&Record<T>> {
        self.records.iter().min_by(|a, b| {
            (a.t - t)
                .abs()
                .partial_cmp(&(b.t - t).abs())
                .expect("finite times")
        })
    }

    pub fn times(&self) -> Vec<T> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn series(&self, f: impl Fn(&Record<T>) -> T) -> Vec<T> {
        self.records.iter().map(f).collect()
    }
}
