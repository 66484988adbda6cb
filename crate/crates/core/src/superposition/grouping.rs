//! Splitting the requested subfiles of one sublibrary into single-demand groups.

use crate::model::{DemandVector, SubfileId};

/// Subfile requested by each user (0-based) inside one group. `None` marks a
/// user left without a subfile when the remaining ones cannot cover it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupDemand {
    pub assignments: Vec<Option<SubfileId>>,
}

impl GroupDemand {
    /// Users whose subfile differs from that of every weaker user
    /// (bitmask over 0-based users).
    pub fn leaders(&self) -> u64 {
        let mut out = 0u64;
        for (k, s) in self.assignments.iter().enumerate() {
            if let Some(s) = s {
                if !self.assignments[..k].contains(&Some(*s)) {
                    out |= 1 << k;
                }
            }
        }
        out
    }

    /// Distinct subfiles in the group.
    pub fn distinct(&self) -> usize {
        let mut seen: Vec<SubfileId> = self.assignments.iter().flatten().copied().collect();
        seen.sort();
        seen.dedup();
        seen.len()
    }
}

/// Subfiles `S` of `candidates` with `|S ∩ D| = r`, `D` the requested files.
pub fn requested_with_overlap(
    candidates: &[SubfileId],
    demand: &DemandVector,
    r: usize,
) -> Vec<SubfileId> {
    let d = demand.files_mask();
    candidates
        .iter()
        .copied()
        .filter(|s| (s.mask() & d).count_ones() as usize == r)
        .collect()
}

/// Groups the subfiles of `w` (all with `|S ∩ D| = r`) so that every user
/// requests one subfile per group.
///
/// Each group starts with all requested files `F = D` uncovered. While
/// `|F| ≥ r`, a subfile whose requested files lie inside `F` covers them.
/// Once fewer than `r` files remain, a subfile containing all of them covers
/// them and its other requested files are carried over to the next group.
/// Ties are broken by the smallest bitmask.
pub fn group(w: &[SubfileId], demand: &DemandVector, r: usize) -> Vec<GroupDemand> {
    assert!(r >= 1, "every subfile in a group overlaps the demand");
    let d = demand.files_mask();
    let mut remaining: Vec<SubfileId> = w.to_vec();
    remaining.sort();
    remaining.dedup();
    let mut pending: Option<(SubfileId, u32)> = None;
    let mut groups = Vec::new();
    while !remaining.is_empty() || pending.is_some() {
        let mut f = d;
        let mut assignments = vec![None; demand.n_users()];
        let assign = |s: SubfileId, files: u32, a: &mut Vec<Option<SubfileId>>| {
            let users = demand.users_requesting(files);
            for (k, slot) in a.iter_mut().enumerate() {
                if users >> k & 1 == 1 {
                    *slot = Some(s);
                }
            }
        };
        while f != 0 {
            if f.count_ones() as usize >= r {
                if let Some((s, carried)) = pending.take() {
                    assign(s, carried, &mut assignments);
                    f &= !carried;
                } else if let Some(i) = remaining.iter().position(|s| s.mask() & d & !f == 0) {
                    let s = remaining.remove(i);
                    assign(s, s.mask() & d, &mut assignments);
                    f &= !s.mask();
                } else {
                    break;
                }
            } else if let Some(i) = remaining.iter().position(|s| f & !s.mask() == 0) {
                let s = remaining.remove(i);
                assign(s, f, &mut assignments);
                pending = Some((s, s.mask() & d & !f));
                f = 0;
            } else {
                break;
            }
        }
        if assignments.iter().all(Option::is_none) {
            break;
        }
        groups.push(GroupDemand { assignments });
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::{binomial, subsets_of_size};
    use crate::model::all_demands;

    fn sf(files: &[usize]) -> SubfileId {
        SubfileId::from_files(files)
    }

    fn level(n: usize, l: usize) -> Vec<SubfileId> {
        subsets_of_size(n, l).map(|m| SubfileId::from_mask(m as u32)).collect()
    }

    #[test]
    fn three_users_pairs() {
        let d = DemandVector::new(vec![1, 2, 3], 3).unwrap();
        let w = requested_with_overlap(&level(3, 2), &d, 2);
        let g = group(&w, &d, 2);
        assert_eq!(g.len(), 2);
        let a = |v: &[&[usize]]| v.iter().map(|f| Some(sf(f))).collect::<Vec<_>>();
        assert_eq!(g[0].assignments, a(&[&[1, 2], &[1, 2], &[1, 3]]));
        assert_eq!(g[1].assignments, a(&[&[1, 3], &[2, 3], &[2, 3]]));
    }

    #[test]
    fn subfile_wanted_by_everyone() {
        let d = DemandVector::new(vec![1, 2, 3], 3).unwrap();
        let w = requested_with_overlap(&level(3, 3), &d, 3);
        let g = group(&w, &d, 3);
        assert_eq!(g.len(), 1);
        assert!(g[0].assignments.iter().all(|s| *s == Some(sf(&[1, 2, 3]))));
        assert_eq!(g[0].leaders(), 0b1);
    }

    #[test]
    fn private_subfiles_one_group() {
        let d = DemandVector::new(vec![2, 1, 2], 3).unwrap();
        let w = requested_with_overlap(&level(3, 1), &d, 1);
        let g = group(&w, &d, 1);
        assert_eq!(g.len(), 1);
        assert_eq!(
            g[0].assignments,
            vec![Some(sf(&[2])), Some(sf(&[1])), Some(sf(&[2]))]
        );
        assert_eq!(g[0].leaders(), 0b011);
    }

    #[test]
    fn four_files_two_requested() {
        let d = DemandVector::new(vec![1, 2], 4).unwrap();
        let w = requested_with_overlap(&level(4, 2), &d, 1);
        assert_eq!(w, vec![sf(&[1, 3]), sf(&[2, 3]), sf(&[1, 4]), sf(&[2, 4])]);
        let g = group(&w, &d, 1);
        assert_eq!(g.len(), 2);
    }

    // Every requested subfile lands in a group, every user is served in every
    // group, group sizes stay within the bound, and the number of groups is
    // C(N − |D|, ℓ − r) · C(|D| − 1, r − 1).
    #[test]
    fn group_structure_over_all_small_demands() {
        for n in 1usize..=6 {
            for k in 1..=5 {
                if n.pow(k as u32) > 20_000 {
                    continue;
                }
                for d in all_demands(n, k).unwrap() {
                    let ne = d.distinct_count();
                    for l in 1..=n {
                        let sub = level(n, l);
                        let lo = (l + ne).saturating_sub(n).max(1);
                        for r in lo..=l.min(ne) {
                            let w = requested_with_overlap(&sub, &d, r);
                            let g = group(&w, &d, r);
                            let want = binomial(n - ne, l - r) * binomial(ne - 1, r - 1);
                            assert_eq!(g.len() as u64, want, "n={n} d={d} l={l} r={r}");
                            let mut covered: Vec<SubfileId> =
                                g.iter().flat_map(|x| x.assignments.iter().flatten().copied()).collect();
                            covered.sort();
                            covered.dedup();
                            assert_eq!(covered, w, "n={n} d={d} l={l} r={r}");
                            for grp in &g {
                                assert!(grp.assignments.iter().all(Option::is_some));
                                for (u, s) in grp.assignments.iter().enumerate() {
                                    assert!(s.unwrap().contains(d.of(u)));
                                    assert_eq!(s.unwrap().level(), l);
                                }
                                assert!(grp.distinct() <= ne.div_ceil(r) + 1);
                            }
                        }
                    }
                }
            }
        }
    }
}
