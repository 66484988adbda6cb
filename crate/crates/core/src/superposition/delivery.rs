//! XOR message generation for each single-demand group.

use crate::combinatorics::{bits, subsets_of_size};
use crate::model::{CorrelatedLibrary, DemandVector};
use crate::tokens::{PartClass, SymbolicRate, Token};

use super::grouping::{group, requested_with_overlap, GroupDemand};
use super::placement::PlacementSpec;

/// XOR of equal-size parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XorMessage {
    pub tokens: Vec<Token>,
    pub size: SymbolicRate,
}

/// Groups formed for one `(ℓ, r)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelGroups {
    pub level: usize,
    pub r: usize,
    pub groups: Vec<GroupDemand>,
}

/// Messages targeted at each user, per sublibrary.
#[derive(Debug, Clone, PartialEq)]
pub struct MessagePlan {
    /// `messages[k][ℓ-1]`: messages decoded by user `k` (0-based) and every
    /// stronger user, from sublibrary `L_ℓ`.
    pub messages: Vec<Vec<Vec<XorMessage>>>,
    pub groups: Vec<LevelGroups>,
}

impl MessagePlan {
    pub fn n_users(&self) -> usize {
        self.messages.len()
    }

    /// Exact rate `ρ_k` of the messages targeted at user `k` (0-based).
    pub fn rate(&self, k: usize) -> SymbolicRate {
        let mut acc = SymbolicRate::zero();
        for m in self.messages[k].iter().flatten() {
            acc += &m.size;
        }
        acc
    }

    pub fn rates_f64(&self, spec: &PlacementSpec) -> Vec<f64> {
        (0..self.n_users()).map(|k| spec.eval(&self.rate(k))).collect()
    }

    /// Messages targeted at user `k` from every sublibrary.
    pub fn targeted_at(&self, k: usize) -> impl Iterator<Item = &XorMessage> {
        self.messages[k].iter().flatten()
    }
}

/// Messages for one group and one memory-sharing class with parameter `t`.
///
/// For every user `k` and every `t`-subset `U` of the stronger users such
/// that `U ∪ {k}` contains a leader, user `k` is sent
/// `⊕_{j ∈ U∪{k}} W̄^class_{S_j, U∪{k}∖{j}}`. Users without a subfile in the
/// group contribute no term.
pub fn single_demand(
    class: PartClass,
    grp: &GroupDemand,
    t: usize,
    spec: &PlacementSpec,
) -> Vec<Vec<XorMessage>> {
    let n_users = grp.assignments.len();
    let leaders = grp.leaders();
    let mut out = vec![Vec::new(); n_users];
    let Some(level) = grp.assignments.iter().flatten().next().map(|s| s.level()) else {
        return out;
    };
    let size = spec.part_size(class, level);
    for (k, msgs) in out.iter_mut().enumerate() {
        let stronger = n_users - k - 1;
        if t > stronger {
            continue;
        }
        for u in subsets_of_size(stronger, t) {
            let members = (u << (k + 1)) | 1 << k;
            if members & leaders == 0 {
                continue;
            }
            let tokens = bits(members)
                .filter_map(|j| {
                    grp.assignments[j].map(|s| Token::Part {
                        subfile: s,
                        class,
                        holders: members & !(1 << j),
                    })
                })
                .collect();
            msgs.push(XorMessage { tokens, size: size.clone() });
        }
    }
    out
}

/// Range of overlaps `r = |S ∩ D|` present at level `ℓ`.
pub fn overlap_range(n_files: usize, distinct: usize, level: usize) -> std::ops::RangeInclusive<usize> {
    let lo = (level + distinct).saturating_sub(n_files).max(1);
    lo..=level.min(distinct)
}

/// Groups of every sublibrary with positive rate, ordered by `(ℓ, r)`.
pub fn all_groups(lib: &CorrelatedLibrary, demand: &DemandVector) -> Vec<LevelGroups> {
    let n = lib.n_files();
    let ne = demand.distinct_count();
    let mut out = Vec::new();
    for l in 1..=n {
        if lib.level_rate(l) == 0.0 {
            continue;
        }
        let sub = lib.sublibrary(l);
        for r in overlap_range(n, ne, l) {
            let w = requested_with_overlap(&sub, demand, r);
            out.push(LevelGroups { level: l, r, groups: group(&w, demand, r) });
        }
    }
    out
}

/// All delivery messages for demand `demand` under placement `spec`.
pub fn generate_messages(
    lib: &CorrelatedLibrary,
    spec: &PlacementSpec,
    demand: &DemandVector,
) -> MessagePlan {
    let n_users = spec.n_users;
    assert_eq!(demand.n_users(), n_users, "demand length must match the number of users");
    let mut messages = vec![vec![Vec::new(); lib.n_files()]; n_users];
    let groups = all_groups(lib, demand);
    for lg in &groups {
        let lp = spec.level(lg.level);
        for grp in &lg.groups {
            for class in lp.classes() {
                for (k, msgs) in single_demand(class, grp, lp.t_of(class), spec)
                    .into_iter()
                    .enumerate()
                {
                    messages[k][lg.level - 1].extend(msgs);
                }
            }
        }
    }
    MessagePlan { messages, groups }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::binomial;
    use crate::model::{all_demands, SubfileId};
    use crate::superposition::placement::placement_from_t;
    use crate::tokens::{Basis, Q};

    fn sf(files: &[usize]) -> SubfileId {
        SubfileId::from_files(files)
    }

    fn part(files: &[usize], holders: &[usize]) -> Token {
        Token::Part {
            subfile: sf(files),
            class: PartClass::A,
            holders: holders.iter().fold(0, |m, u| m | 1 << (u - 1)),
        }
    }

    fn xor_sets(msgs: &[XorMessage]) -> Vec<Vec<Token>> {
        let mut v: Vec<Vec<Token>> = msgs
            .iter()
            .map(|m| {
                let mut t = m.tokens.clone();
                t.sort();
                t
            })
            .collect();
        v.sort();
        v
    }

    fn sorted(mut v: Vec<Vec<Token>>) -> Vec<Vec<Token>> {
        for x in &mut v {
            x.sort();
        }
        v.sort();
        v
    }

    fn three_users() -> (CorrelatedLibrary, PlacementSpec, MessagePlan) {
        let lib = CorrelatedLibrary::new(vec![0.3, 0.2, 0.1]).unwrap();
        let spec = placement_from_t(&lib, 3, &[1.0, 1.0, 1.0]);
        let d = DemandVector::new(vec![1, 2, 3], 3).unwrap();
        let plan = generate_messages(&lib, &spec, &d);
        (lib, spec, plan)
    }

    #[test]
    fn three_users_private_level() {
        let (_, _, plan) = three_users();
        assert_eq!(
            xor_sets(&plan.messages[0][0]),
            sorted(vec![
                vec![part(&[1], &[2]), part(&[2], &[1])],
                vec![part(&[1], &[3]), part(&[3], &[1])],
            ])
        );
        assert_eq!(
            xor_sets(&plan.messages[1][0]),
            vec![vec![part(&[2], &[3]), part(&[3], &[2])]]
        );
        assert!(plan.messages[2][0].is_empty());
    }

    #[test]
    fn three_users_pair_level() {
        let (_, _, plan) = three_users();
        assert_eq!(
            xor_sets(&plan.messages[0][1]),
            sorted(vec![
                vec![part(&[1, 2], &[2]), part(&[1, 2], &[1])],
                vec![part(&[1, 2], &[3]), part(&[1, 3], &[1])],
                vec![part(&[1, 3], &[2]), part(&[2, 3], &[1])],
                vec![part(&[1, 3], &[3]), part(&[2, 3], &[1])],
            ])
        );
        assert_eq!(
            xor_sets(&plan.messages[1][1]),
            sorted(vec![
                vec![part(&[1, 2], &[3]), part(&[1, 3], &[2])],
                vec![part(&[2, 3], &[3]), part(&[2, 3], &[2])],
            ])
        );
        assert!(plan.messages[2][1].is_empty());
    }

    #[test]
    fn three_users_common_level() {
        let (_, _, plan) = three_users();
        assert_eq!(
            xor_sets(&plan.messages[0][2]),
            sorted(vec![
                vec![part(&[1, 2, 3], &[2]), part(&[1, 2, 3], &[1])],
                vec![part(&[1, 2, 3], &[3]), part(&[1, 2, 3], &[1])],
            ])
        );
        assert!(plan.messages[1][2].is_empty());
        assert!(plan.messages[2][2].is_empty());
    }

    #[test]
    fn three_users_rates() {
        let (lib, spec, plan) = three_users();
        let r = lib.level_rates();
        let rho = plan.rates_f64(&spec);
        let want = [
            2.0 / 3.0 * (r[0] + 2.0 * r[1] + r[2]),
            1.0 / 3.0 * (r[0] + 2.0 * r[1]),
            0.0,
        ];
        for (g, w) in rho.iter().zip(want) {
            assert!((g - w).abs() < 1e-15, "{rho:?}");
        }
        let exact = plan.rate(0);
        assert_eq!(exact.coeff(Basis::Share { level: 1, class: PartClass::A }), Q::new(2, 3));
        assert_eq!(exact.coeff(Basis::Share { level: 2, class: PartClass::A }), Q::new(4, 3));
        assert_eq!(exact.coeff(Basis::Share { level: 3, class: PartClass::A }), Q::new(2, 3));
    }

    #[test]
    fn uncached_delivery_sends_leader_subfiles() {
        let lib = CorrelatedLibrary::new(vec![0.5, 0.25]).unwrap();
        let spec = placement_from_t(&lib, 3, &[0.0, 0.0]);
        let d = DemandVector::new(vec![2, 2, 1], 2).unwrap();
        let plan = generate_messages(&lib, &spec, &d);
        assert_eq!(
            xor_sets(&plan.messages[0][0]),
            vec![vec![part(&[2], &[])]]
        );
        assert!(plan.messages[1][0].is_empty());
        assert_eq!(xor_sets(&plan.messages[2][0]), vec![vec![part(&[1], &[])]]);
        assert_eq!(xor_sets(&plan.messages[0][1]), vec![vec![part(&[1, 2], &[])]]);
    }

    #[test]
    fn single_common_request_goes_to_weakest_only() {
        let lib = CorrelatedLibrary::new(vec![0.0, 0.0, 1.0]).unwrap();
        let spec = placement_from_t(&lib, 3, &[0.0, 0.0, 0.0]);
        let d = DemandVector::new(vec![1, 1, 1], 3).unwrap();
        let plan = generate_messages(&lib, &spec, &d);
        let rho = plan.rates_f64(&spec);
        assert_eq!(rho, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn everything_cached_sends_nothing() {
        let lib = CorrelatedLibrary::new(vec![0.5, 0.25, 0.1]).unwrap();
        let spec = placement_from_t(&lib, 3, &[3.0, 3.0, 3.0]);
        for d in all_demands(3, 3).unwrap() {
            let plan = generate_messages(&lib, &spec, &d);
            assert!((0..3).all(|k| plan.rate(k).is_zero()));
        }
    }

    // The per-user union over groups never merges two identical messages, so
    // rates can be summed group by group.
    #[test]
    fn no_user_receives_a_message_twice() {
        for n in 1..=4 {
            for k in 1..=4usize {
                let lib = CorrelatedLibrary::new(vec![0.1; n]).unwrap();
                for t in 0..=k {
                    let spec = placement_from_t(&lib, k, &vec![t as f64; n]);
                    for d in all_demands(n, k).unwrap() {
                        let plan = generate_messages(&lib, &spec, &d);
                        for u in 0..k {
                            let all = xor_sets(&plan.targeted_at(u).cloned().collect::<Vec<_>>());
                            let mut dedup = all.clone();
                            dedup.dedup();
                            assert_eq!(all.len(), dedup.len(), "n={n} d={d} t={t} user {u}");
                        }
                    }
                }
            }
        }
    }

    // Per group and class, the messages are the (t+1)-subsets of users that
    // contain a leader, each of size share / C(K, t); messages go to leaders
    // or to users weaker than some leader only.
    #[test]
    fn totals_match_leader_count_formula() {
        for n in 1..=4 {
            for k in 1..=4usize {
                let lib = CorrelatedLibrary::new((1..=n).map(|l| 1.0 / (l as f64 + 1.0)).collect()).unwrap();
                let mut grids: Vec<Vec<f64>> = (0..=k).map(|t| vec![t as f64; n]).collect();
                grids.push((1..=n).map(|l| (l % (k + 1)) as f64 + 0.5).collect());
                for t in grids {
                    let spec = placement_from_t(&lib, k, &t);
                    for d in all_demands(n, k).unwrap() {
                        let plan = generate_messages(&lib, &spec, &d);
                        for lg in &plan.groups {
                            let lp = spec.level(lg.level);
                            for grp in &lg.groups {
                                let leaders = grp.leaders();
                                let g = leaders.count_ones() as usize;
                                for class in lp.classes() {
                                    let tc = lp.t_of(class);
                                    let msgs = single_demand(class, grp, tc, &spec);
                                    let mut total = SymbolicRate::zero();
                                    for (u, m) in msgs.iter().enumerate() {
                                        for x in m {
                                            total += &x.size;
                                            let sizes_ok = x.tokens.iter().all(|tok| match tok {
                                                Token::Part { holders, class: c, .. } => {
                                                    holders.count_ones() as usize == tc && *c == class
                                                }
                                                _ => false,
                                            });
                                            assert!(sizes_ok);
                                        }
                                        if !m.is_empty() {
                                            assert!(leaders >> u != 0, "user {u} beyond the last leader");
                                        }
                                    }
                                    let count = binomial(k, tc + 1) - binomial(k - g, tc + 1);
                                    let want = &spec.part_size(class, lg.level)
                                        * Q::from_integer(count as i64);
                                    assert_eq!(total, want, "n={n} k={k} d={d} t={t:?}");
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}
