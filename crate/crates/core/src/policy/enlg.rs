use serde::Serialize;

use super::{check_index, Axis, Catalog, PolicyError, SecurityLevel};

/// Levels-then-groups policy.
///
/// Every user carries a maximum level `Lu(i)` and every resource `Lr(k)`.
/// Membership cubes `Ulg(i, l, j)` / `Rlg(k, l, j)` say whether the entity
/// belongs to group `j` at level `l`; entries above the entity's maximum are
/// false by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnlgPolicy {
    levels: u8,
    users: Catalog,
    groups: Catalog,
    resources: Catalog,
    lu: Vec<u8>,
    lr: Vec<u8>,
    ulg: Vec<bool>,
    rlg: Vec<bool>,
}

/// The `(level, group)` pair that satisfies the existential access condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AccessWitness {
    pub level: SecurityLevel,
    /// 1-based group index.
    pub group: usize,
}

impl EnlgPolicy {
    /// Builds a policy from maximum levels and 1-based `(entity, level, group)`
    /// membership triples.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        levels: u8,
        users: Catalog,
        groups: Catalog,
        resources: Catalog,
        lu: Vec<u8>,
        lr: Vec<u8>,
        ulg: &[(usize, u8, usize)],
        rlg: &[(usize, u8, usize)],
    ) -> Result<Self, PolicyError> {
        if levels == 0 {
            return Err(PolicyError::NoLevels);
        }
        check_maxima("lu", &lu, users.len(), levels)?;
        check_maxima("lr", &lr, resources.len(), levels)?;
        let m = groups.len();
        let ulg = cube(Axis::User, ulg, &lu, levels, m)?;
        let rlg = cube(Axis::Resource, rlg, &lr, levels, m)?;
        Ok(EnlgPolicy {
            levels,
            users,
            groups,
            resources,
            lu,
            lr,
            ulg,
            rlg,
        })
    }

    /// Policy over generated names `u1..`, `g1..`, `r1..`.
    pub fn numbered(
        levels: u8,
        groups: usize,
        lu: Vec<u8>,
        lr: Vec<u8>,
        ulg: &[(usize, u8, usize)],
        rlg: &[(usize, u8, usize)],
    ) -> Result<Self, PolicyError> {
        EnlgPolicy::new(
            levels,
            Catalog::numbered(Axis::User, "u", lu.len())?,
            Catalog::numbered(Axis::Group, "g", groups)?,
            Catalog::numbered(Axis::Resource, "r", lr.len())?,
            lu,
            lr,
            ulg,
            rlg,
        )
    }

    pub fn levels(&self) -> u8 {
        self.levels
    }

    pub fn users(&self) -> &Catalog {
        &self.users
    }

    pub fn groups(&self) -> &Catalog {
        &self.groups
    }

    pub fn resources(&self) -> &Catalog {
        &self.resources
    }

    /// `Lu(i)`.
    pub fn user_max(&self, i: usize) -> Result<SecurityLevel, PolicyError> {
        check_index(Axis::User, i, self.users.len())?;
        Ok(SecurityLevel(self.lu[i - 1]))
    }

    /// `Lr(k)`.
    pub fn resource_max(&self, k: usize) -> Result<SecurityLevel, PolicyError> {
        check_index(Axis::Resource, k, self.resources.len())?;
        Ok(SecurityLevel(self.lr[k - 1]))
    }

    /// `Ulg(i, l, j)`; levels outside `1..=q` read as false.
    pub fn user_in(&self, i: usize, l: u8, j: usize) -> Result<bool, PolicyError> {
        check_index(Axis::User, i, self.users.len())?;
        check_index(Axis::Group, j, self.groups.len())?;
        Ok(self.ulg_at(i, l, j))
    }

    /// `Rlg(k, l, j)`; levels outside `1..=q` read as false.
    pub fn resource_in(&self, k: usize, l: u8, j: usize) -> Result<bool, PolicyError> {
        check_index(Axis::Resource, k, self.resources.len())?;
        check_index(Axis::Group, j, self.groups.len())?;
        Ok(self.rlg_at(k, l, j))
    }

    /// Membership triples of the user cube, ordered by (user, level, group).
    pub fn user_memberships(&self) -> Vec<(usize, u8, usize)> {
        triples(&self.ulg, self.levels, self.groups.len())
    }

    /// Membership triples of the resource cube, ordered by (resource, level, group).
    pub fn resource_memberships(&self) -> Vec<(usize, u8, usize)> {
        triples(&self.rlg, self.levels, self.groups.len())
    }

    fn slot(&self, e: usize, l: u8, j: usize) -> Option<usize> {
        if l == 0 || l > self.levels {
            return None;
        }
        let m = self.groups.len();
        Some(((e - 1) * self.levels as usize + (l as usize - 1)) * m + (j - 1))
    }

    fn ulg_at(&self, i: usize, l: u8, j: usize) -> bool {
        self.slot(i, l, j).is_some_and(|s| self.ulg[s])
    }

    fn rlg_at(&self, k: usize, l: u8, j: usize) -> bool {
        self.slot(k, l, j).is_some_and(|s| self.rlg[s])
    }

    /// Access of user `i` to resource `k`.
    pub fn can_access(&self, i: usize, k: usize) -> Result<Option<AccessWitness>, PolicyError> {
        self.witness(i, i, k, None, None)
    }

    /// Interaction of users `i0` and `i1` by resource `k`: the lower of the two
    /// user maxima dominates `Lr(k)`, and some level `l0 <= Lr(k)` and group
    /// `j0` hold all three memberships.
    pub fn can_interact(
        &self,
        i0: usize,
        i1: usize,
        k: usize,
    ) -> Result<Option<AccessWitness>, PolicyError> {
        self.witness(i0, i1, k, None, None)
    }

    /// Like [`can_interact`](Self::can_interact) with the witness restricted to
    /// group `group` (when given) and to levels at or below `level_cap`.
    ///
    /// The smallest group wins, then the smallest level.
    pub fn witness(
        &self,
        i0: usize,
        i1: usize,
        k: usize,
        group: Option<usize>,
        level_cap: Option<SecurityLevel>,
    ) -> Result<Option<AccessWitness>, PolicyError> {
        let max0 = self.user_max(i0)?.get();
        let max1 = self.user_max(i1)?.get();
        let rmax = self.resource_max(k)?.get();
        let groups = match group {
            Some(j) => {
                check_index(Axis::Group, j, self.groups.len())?;
                j..=j
            }
            None => 1..=self.groups.len(),
        };
        if max0.min(max1) < rmax {
            return Ok(None);
        }
        let top = level_cap.map_or(rmax, |c| c.get().min(rmax));
        for j in groups {
            for l in 1..=top {
                if self.ulg_at(i0, l, j) && self.ulg_at(i1, l, j) && self.rlg_at(k, l, j) {
                    return Ok(Some(AccessWitness {
                        level: SecurityLevel(l),
                        group: j,
                    }));
                }
            }
        }
        Ok(None)
    }

    /// Groups the user belongs to at any level, with the highest such level.
    pub fn list_groups(&self, i: usize) -> Result<Vec<(usize, SecurityLevel)>, PolicyError> {
        let max = self.user_max(i)?;
        self.list_groups_at(i, max)
    }

    /// Groups the user belongs to at some level `<= level`, paired with the
    /// highest such level.
    pub fn list_groups_at(
        &self,
        i: usize,
        level: SecurityLevel,
    ) -> Result<Vec<(usize, SecurityLevel)>, PolicyError> {
        let max = self.user_max(i)?;
        if level > max {
            return Err(PolicyError::Entitlement {
                cap: level.get(),
                max: max.get(),
            });
        }
        Ok((1..=self.groups.len())
            .filter_map(|j| {
                (1..=level.get())
                    .rev()
                    .find(|&l| self.ulg_at(i, l, j))
                    .map(|l| (j, SecurityLevel(l)))
            })
            .collect())
    }

    /// Resources the user reaches through group `j`, with the witness level at
    /// or below `level_cap` when supplied.
    pub fn list_resources(
        &self,
        i: usize,
        j: usize,
        level_cap: Option<SecurityLevel>,
    ) -> Result<Vec<usize>, PolicyError> {
        let max = self.user_max(i)?;
        check_index(Axis::Group, j, self.groups.len())?;
        if let Some(cap) = level_cap {
            if cap > max {
                return Err(PolicyError::Entitlement {
                    cap: cap.get(),
                    max: max.get(),
                });
            }
        }
        let mut out = Vec::new();
        for k in 1..=self.resources.len() {
            if self.witness(i, i, k, Some(j), level_cap)?.is_some() {
                out.push(k);
            }
        }
        Ok(out)
    }
}

fn check_maxima(
    what: &'static str,
    maxima: &[u8],
    len: usize,
    levels: u8,
) -> Result<(), PolicyError> {
    if maxima.len() != len {
        return Err(PolicyError::Shape {
            what,
            expected: len,
            actual: maxima.len(),
        });
    }
    for &v in maxima {
        if v == 0 || v > levels {
            return Err(PolicyError::LevelOutOfRange {
                what,
                value: v,
                min: 1,
                max: levels,
            });
        }
    }
    Ok(())
}

fn cube(
    axis: Axis,
    entries: &[(usize, u8, usize)],
    maxima: &[u8],
    levels: u8,
    groups: usize,
) -> Result<Vec<bool>, PolicyError> {
    let what = match axis {
        Axis::User => "ulg",
        _ => "rlg",
    };
    let mut cube = vec![false; maxima.len() * levels as usize * groups];
    for &(e, l, j) in entries {
        check_index(axis, e, maxima.len())?;
        check_index(Axis::Group, j, groups)?;
        if l == 0 || l > levels {
            return Err(PolicyError::LevelOutOfRange {
                what,
                value: l,
                min: 1,
                max: levels,
            });
        }
        let max = maxima[e - 1];
        if l > max {
            return Err(PolicyError::AboveMaximum {
                axis,
                index: e,
                level: l,
                max,
            });
        }
        cube[((e - 1) * levels as usize + (l as usize - 1)) * groups + (j - 1)] = true;
    }
    Ok(cube)
}

fn triples(cube: &[bool], levels: u8, groups: usize) -> Vec<(usize, u8, usize)> {
    let per_entity = levels as usize * groups;
    cube.iter()
        .enumerate()
        .filter(|(_, &set)| set)
        .map(|(s, _)| {
            let e = s / per_entity + 1;
            let l = (s % per_entity) / groups + 1;
            let j = s % groups + 1;
            (e, l as u8, j)
        })
        .collect()
}
