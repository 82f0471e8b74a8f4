use super::{check_index, Axis, Catalog, PolicyError, SecurityLevel};

/// Groups-then-levels policy.
///
/// `lug` is the n×m user/group matrix and `lrg` the p×m resource/group
/// matrix. An entry of `0` means "not a member"; any other entry is the
/// entity's maximum level inside that group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnglPolicy {
    levels: u8,
    users: Catalog,
    groups: Catalog,
    resources: Catalog,
    lug: Vec<u8>,
    lrg: Vec<u8>,
}

impl EnglPolicy {
    pub fn new(
        levels: u8,
        users: Catalog,
        groups: Catalog,
        resources: Catalog,
        lug: Vec<Vec<u8>>,
        lrg: Vec<Vec<u8>>,
    ) -> Result<Self, PolicyError> {
        if levels == 0 {
            return Err(PolicyError::NoLevels);
        }
        let m = groups.len();
        let lug = flatten("lug", lug, users.len(), m, levels)?;
        let lrg = flatten("lrg", lrg, resources.len(), m, levels)?;
        Ok(EnglPolicy {
            levels,
            users,
            groups,
            resources,
            lug,
            lrg,
        })
    }

    /// Policy over generated names `u1..`, `g1..`, `r1..`.
    pub fn numbered(levels: u8, lug: Vec<Vec<u8>>, lrg: Vec<Vec<u8>>) -> Result<Self, PolicyError> {
        let n = lug.len();
        let p = lrg.len();
        let m = lug.first().or(lrg.first()).map_or(0, Vec::len);
        EnglPolicy::new(
            levels,
            Catalog::numbered(Axis::User, "u", n)?,
            Catalog::numbered(Axis::Group, "g", m)?,
            Catalog::numbered(Axis::Resource, "r", p)?,
            lug,
            lrg,
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

    /// Raw `Lug(i, j)` entry, `0` for non-membership.
    pub fn user_level(&self, i: usize, j: usize) -> Result<u8, PolicyError> {
        check_index(Axis::User, i, self.users.len())?;
        check_index(Axis::Group, j, self.groups.len())?;
        Ok(self.lug[(i - 1) * self.groups.len() + (j - 1)])
    }

    /// Raw `Lrg(k, j)` entry, `0` for non-membership.
    pub fn resource_level(&self, k: usize, j: usize) -> Result<u8, PolicyError> {
        check_index(Axis::Resource, k, self.resources.len())?;
        check_index(Axis::Group, j, self.groups.len())?;
        Ok(self.lrg[(k - 1) * self.groups.len() + (j - 1)])
    }

    /// Copy of this policy with `Lug(i, j)` replaced.
    pub fn with_user_level(&self, i: usize, j: usize, value: u8) -> Result<Self, PolicyError> {
        self.user_level(i, j)?;
        check_entry("lug", value, self.levels)?;
        let mut next = self.clone();
        next.lug[(i - 1) * self.groups.len() + (j - 1)] = value;
        Ok(next)
    }

    /// Copy of this policy with `Lrg(k, j)` replaced.
    pub fn with_resource_level(&self, k: usize, j: usize, value: u8) -> Result<Self, PolicyError> {
        self.resource_level(k, j)?;
        check_entry("lrg", value, self.levels)?;
        let mut next = self.clone();
        next.lrg[(k - 1) * self.groups.len() + (j - 1)] = value;
        Ok(next)
    }

    pub fn member_user(&self, i: usize, j: usize) -> Result<bool, PolicyError> {
        Ok(self.user_level(i, j)? > 0)
    }

    pub fn member_resource(&self, k: usize, j: usize) -> Result<bool, PolicyError> {
        Ok(self.resource_level(k, j)? > 0)
    }

    /// User `i` may use resource `k` inside group `j`: both are members and
    /// the user's level there dominates the resource's.
    pub fn can_access(&self, i: usize, k: usize, j: usize) -> Result<bool, PolicyError> {
        self.can_interact(i, i, k, j)
    }

    /// Users `i0` and `i1` may interact in group `j` by resource `k`.
    ///
    /// All three memberships are required; the bare `min >= Lrg` comparison
    /// would otherwise admit resources outside the group (`Lrg = 0`).
    pub fn can_interact(
        &self,
        i0: usize,
        i1: usize,
        k: usize,
        j: usize,
    ) -> Result<bool, PolicyError> {
        let a = self.user_level(i0, j)?;
        let b = self.user_level(i1, j)?;
        let r = self.resource_level(k, j)?;
        Ok(a > 0 && b > 0 && r > 0 && a.min(b) >= r)
    }

    pub fn list_groups(&self, i: usize) -> Result<Vec<(usize, SecurityLevel)>, PolicyError> {
        check_index(Axis::User, i, self.users.len())?;
        let m = self.groups.len();
        let row = &self.lug[(i - 1) * m..i * m];
        Ok(row
            .iter()
            .enumerate()
            .filter_map(|(o, &v)| SecurityLevel::new(v).map(|l| (o + 1, l)))
            .collect())
    }

    pub fn list_resources(
        &self,
        i: usize,
        j: usize,
        level_cap: Option<SecurityLevel>,
    ) -> Result<Vec<usize>, PolicyError> {
        let entitled = self.user_level(i, j)?;
        let cap = match level_cap {
            Some(cap) if cap.get() > entitled => {
                return Err(PolicyError::Entitlement {
                    cap: cap.get(),
                    max: entitled,
                });
            }
            Some(cap) => cap.get(),
            None => entitled,
        };
        let mut out = Vec::new();
        for k in 1..=self.resources.len() {
            if self.can_access(i, k, j)? && self.resource_level(k, j)? <= cap {
                out.push(k);
            }
        }
        Ok(out)
    }
}

fn check_entry(what: &'static str, value: u8, levels: u8) -> Result<(), PolicyError> {
    if value > levels {
        Err(PolicyError::LevelOutOfRange {
            what,
            value,
            min: 0,
            max: levels,
        })
    } else {
        Ok(())
    }
}

fn flatten(
    what: &'static str,
    rows: Vec<Vec<u8>>,
    n_rows: usize,
    n_cols: usize,
    levels: u8,
) -> Result<Vec<u8>, PolicyError> {
    if rows.len() != n_rows {
        return Err(PolicyError::Shape {
            what,
            expected: n_rows,
            actual: rows.len(),
        });
    }
    let mut flat = Vec::with_capacity(n_rows * n_cols);
    for row in rows {
        if row.len() != n_cols {
            return Err(PolicyError::Shape {
                what,
                expected: n_cols,
                actual: row.len(),
            });
        }
        for &v in &row {
            check_entry(what, v, levels)?;
        }
        flat.extend(row);
    }
    Ok(flat)
}
