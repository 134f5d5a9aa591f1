//! The fixed environment of a market: capacities and preference lists.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::InstanceError;

/// A validated market: `n` students, `m <= n` schools with positive
/// capacities, and one strict, possibly partial, preference list per student.
///
/// Lists are stored flattened; `preferences(i)` borrows student `i`'s list,
/// best school first. Schools missing from a list are unacceptable to that
/// student.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarketInstance {
    capacities: Vec<u32>,
    offsets: Vec<usize>,
    lists: Vec<u32>,
}

impl MarketInstance {
    /// Validates raw data. Nothing is repaired: any violation is an error.
    ///
    /// `n` and `m` are the declared counts; they must agree with the lengths
    /// of `preferences` and `capacities`.
    pub fn new<L: AsRef<[u64]>>(
        n: usize,
        m: usize,
        capacities: &[u64],
        preferences: &[L],
    ) -> Result<Self, InstanceError> {
        if n == 0 || m == 0 {
            return Err(InstanceError::EmptyMarket);
        }
        if m > n {
            return Err(InstanceError::MoreSchoolsThanStudents { n, m });
        }
        if capacities.len() != m {
            return Err(InstanceError::LengthMismatch {
                field: "capacities",
                expected: m,
                found: capacities.len(),
            });
        }
        if preferences.len() != n {
            return Err(InstanceError::LengthMismatch {
                field: "preferences",
                expected: n,
                found: preferences.len(),
            });
        }
        let mut caps = Vec::with_capacity(m);
        for (school, &c) in capacities.iter().enumerate() {
            if c == 0 {
                return Err(InstanceError::ZeroCapacity { school });
            }
            caps.push(u32::try_from(c).unwrap_or(u32::MAX));
        }

        let total: usize = preferences.iter().map(|l| l.as_ref().len()).sum();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut lists = Vec::with_capacity(total);
        // stamp[k] == student + 1 marks school k as already seen in this list
        let mut stamp = vec![0usize; m];
        offsets.push(0);
        for (student, list) in preferences.iter().enumerate() {
            for &school in list.as_ref() {
                if school >= m as u64 {
                    return Err(InstanceError::SchoolIndexOutOfRange { student, school, m });
                }
                let k = school as usize;
                if stamp[k] == student + 1 {
                    return Err(InstanceError::DuplicateSchoolInList { student, school: k });
                }
                stamp[k] = student + 1;
                lists.push(school as u32);
            }
            offsets.push(lists.len());
        }
        Ok(MarketInstance { capacities: caps, offsets, lists })
    }

    /// Builds from `u32` lists; a convenience for generators and tests.
    pub fn from_lists(capacities: &[u32], preferences: &[Vec<u32>]) -> Result<Self, InstanceError> {
        let caps: Vec<u64> = capacities.iter().map(|&c| c as u64).collect();
        let prefs: Vec<Vec<u64>> = preferences
            .iter()
            .map(|l| l.iter().map(|&s| s as u64).collect())
            .collect();
        MarketInstance::new(preferences.len(), capacities.len(), &caps, &prefs)
    }

    /// Number of students.
    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of schools.
    pub fn m(&self) -> usize {
        self.capacities.len()
    }

    pub fn capacity(&self, school: usize) -> u32 {
        self.capacities[school]
    }

    pub fn capacities(&self) -> &[u32] {
        &self.capacities
    }

    /// Student's list, best first.
    #[inline]
    pub fn preferences(&self, student: usize) -> &[u32] {
        &self.lists[self.offsets[student]..self.offsets[student + 1]]
    }

    /// Position of `school` in the student's list, if listed.
    pub fn position(&self, student: usize, school: usize) -> Option<usize> {
        self.preferences(student).iter().position(|&s| s as usize == school)
    }

    /// All lists as owned vectors (for serialization).
    pub fn preference_lists(&self) -> Vec<Vec<u32>> {
        (0..self.n()).map(|i| self.preferences(i).to_vec()).collect()
    }

    pub fn total_capacity(&self) -> u64 {
        self.capacities.iter().map(|&c| c as u64).sum()
    }
}
