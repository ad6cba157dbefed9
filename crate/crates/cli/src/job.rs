use clap::Args;
use ptower::partitions::TowerKind;
use ptower::{Error, RingSpec, Result};
use rayon::prelude::*;

/// Which tower a command works on.
#[derive(Args, Debug, Clone)]
pub struct Target {
    /// Prime ℓ, or a comma-separated list of primes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub ell: Vec<u32>,
    /// Work modulo ℓ^m.
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    /// Tower of p_r, the r-colored partitions.
    #[arg(long, conflicts_with = "spt", required_unless_present = "spt")]
    pub r: Option<u32>,
    /// Tower of the smallest parts function.
    #[arg(long)]
    pub spt: bool,
}

/// One validated unit of work.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JobSpec {
    pub kind: TowerKind,
    pub ring: RingSpec,
}

impl Target {
    pub fn kind(&self) -> TowerKind {
        match self.r {
            Some(r) => TowerKind::Pr(r),
            None => TowerKind::Spt,
        }
    }

    /// Validates every (ℓ, m, family) combination before any work starts.
    pub fn specs(&self) -> Result<Vec<JobSpec>> {
        let kind = self.kind();
        self.ell
            .iter()
            .map(|&ell| {
                let ring = RingSpec::new(ell, self.m)?;
                kind.validate(ring)?;
                Ok(JobSpec { kind, ring })
            })
            .collect()
    }

    /// Exactly one ℓ, for commands without a list form.
    pub fn single(&self) -> Result<JobSpec> {
        match self.specs()?.as_slice() {
            [one] => Ok(*one),
            _ => Err(Error::Invalid("this command takes a single --ell".into())),
        }
    }
}

/// Runs `f` over `items`, in parallel on `jobs` threads when `jobs > 1`.
/// Results keep the input order.
pub fn run_jobs<T, R, F>(jobs: usize, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if jobs <= 1 || items.len() <= 1 {
        return Ok(items.iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Invalid(format!("cannot start {jobs} workers: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(f).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let t = Target { ell: vec![13, 17], m: 1, r: Some(2), spt: false };
        assert_eq!(t.specs().unwrap().len(), 2);
        assert!(t.single().is_err());
        let bad = Target { ell: vec![99], m: 1, r: None, spt: true };
        assert_eq!(bad.specs(), Err(Error::NotPrime(99)));
        let small = Target { ell: vec![5], m: 1, r: Some(2), spt: false };
        assert!(matches!(small.specs(), Err(Error::PrimeTooSmall { .. })));
    }

    #[test]
    fn jobs_keep_order() {
        let xs: Vec<u32> = (0..20).collect();
        assert_eq!(run_jobs(4, &xs, |x| x * 2).unwrap(), run_jobs(1, &xs, |x| x * 2).unwrap());
    }
}
