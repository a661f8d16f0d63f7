use crate::error::{Error, Result};

/// Which columns an estimator reads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Roles {
    /// Column carrying univariate samples.
    pub sample: usize,
    /// Regression response.
    pub response: Option<usize>,
    /// Regression covariates, in design order.
    pub covariates: Vec<usize>,
}

/// A rows-by-columns numeric table, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    roles: Roles,
}

impl Dataset {
    /// Builds a table and assigns default roles: the first column holds
    /// univariate samples; the response is the column named `y` if present,
    /// otherwise the last column, and every other column is a covariate.
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::Data(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        let Some(first) = columns.first() else {
            return Err(Error::Data("no columns".into()));
        };
        let n = first.len();
        if n == 0 {
            return Err(Error::Data("no rows".into()));
        }
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != n {
                return Err(Error::Data(format!(
                    "column `{name}` has {} rows, expected {n}",
                    col.len()
                )));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::Data(format!("non-finite value in `{name}` at row {i}")));
            }
        }
        let p = columns.len();
        let response = names.iter().position(|s| s == "y").unwrap_or(p - 1);
        let roles = Roles {
            sample: 0,
            response: (p > 1).then_some(response),
            covariates: (0..p).filter(|&j| p > 1 && j != response).collect(),
        };
        Ok(Self {
            names,
            columns,
            roles,
        })
    }

    pub fn univariate(values: Vec<f64>) -> Result<Self> {
        Self::new(vec!["x".into()], vec![values])
    }

    /// `covariates` in design order followed by the response `y`.
    pub fn regression(covariates: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self> {
        let mut names: Vec<String> = (1..=covariates.len()).map(|k| format!("x{k}")).collect();
        names.push("y".into());
        let mut columns = covariates;
        columns.push(y);
        Self::new(names, columns)
    }

    pub fn with_roles(mut self, roles: Roles) -> Result<Self> {
        let p = self.columns.len();
        let all = std::iter::once(roles.sample)
            .chain(roles.response)
            .chain(roles.covariates.iter().copied());
        for j in all {
            if j >= p {
                return Err(Error::Data(format!("role refers to column {j}, table has {p}")));
            }
        }
        self.roles = roles;
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.columns[0].len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|s| s == name)
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn roles(&self) -> &Roles {
        &self.roles
    }

    pub fn all_rows(&self) -> Vec<usize> {
        (0..self.n_rows()).collect()
    }

    pub fn view<'a>(&'a self, rows: &'a [usize]) -> DataView<'a> {
        DataView { data: self, rows }
    }
}

/// A subset of rows of a [`Dataset`], the unit an estimator sees.
#[derive(Debug, Clone, Copy)]
pub struct DataView<'a> {
    data: &'a Dataset,
    rows: &'a [usize],
}

impl<'a> DataView<'a> {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &'a [usize] {
        self.rows
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.data
    }

    pub fn column(&self, j: usize) -> impl ExactSizeIterator<Item = f64> + 'a {
        let col = self.data.column(j);
        self.rows.iter().map(move |&i| col[i])
    }

    /// Values of the univariate sample column.
    pub fn sample(&self) -> Vec<f64> {
        self.column(self.data.roles.sample).collect()
    }

    pub fn response(&self) -> Result<Vec<f64>> {
        let j = self
            .data
            .roles
            .response
            .ok_or_else(|| Error::Data("no response column assigned".into()))?;
        Ok(self.column(j).collect())
    }

    pub fn covariate_indices(&self) -> &'a [usize] {
        &self.data.roles.covariates
    }
}
