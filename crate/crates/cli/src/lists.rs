//! Parsing of list-valued flags such as `--n 4-8,10`.

use std::str::FromStr;

use crate::error::{CliError, CliResult};

/// Parses `a,b,c-d` into the listed values, with `c-d` inclusive.
pub fn parse_usize_list(s: &str) -> CliResult<Vec<usize>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let num = |t: &str| {
            t.trim().parse::<usize>().map_err(|e| CliError::Usage(format!("bad integer {t:?} in {s:?}: {e}")))
        };
        match part.split_once('-') {
            Some((lo, hi)) => {
                let (lo, hi) = (num(lo)?, num(hi)?);
                if lo > hi {
                    return Err(CliError::Usage(format!("empty range {part:?}")));
                }
                out.extend(lo..=hi);
            }
            None => out.push(num(part)?),
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage(format!("empty list {s:?}")));
    }
    Ok(out)
}

/// Parses a comma-separated list of `T`, or `all` for `every`.
pub fn parse_named_list<T>(s: &str, every: &[T]) -> CliResult<Vec<T>>
where
    T: FromStr<Err = permball::Error> + Copy,
{
    if s.trim() == "all" {
        return Ok(every.to_vec());
    }
    let items = s
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<T>().map_err(|e| CliError::Usage(e.to_string())))
        .collect::<CliResult<Vec<T>>>()?;
    if items.is_empty() {
        return Err(CliError::Usage(format!("empty list {s:?}")));
    }
    Ok(items)
}

#[cfg(test)]
mod tests {
    use super::*;
    use permball::bounds::Family;

    #[test]
    fn ranges_and_lists() {
        assert_eq!(parse_usize_list("4-6,10").unwrap(), vec![4, 5, 6, 10]);
        assert_eq!(parse_usize_list(" 7 ").unwrap(), vec![7]);
        assert!(parse_usize_list("6-4").is_err());
        assert!(parse_usize_list("x").is_err());
        assert!(parse_usize_list("").is_err());
    }

    #[test]
    fn families() {
        assert_eq!(parse_named_list("all", &Family::ALL).unwrap().len(), 7);
        assert_eq!(parse_named_list("phi2,Phi1", &Family::ALL).unwrap(), vec![Family::Phi2, Family::Phi1Upper]);
        assert!(parse_named_list("phi9", &Family::ALL).is_err());
    }
}
