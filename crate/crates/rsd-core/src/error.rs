use core::fmt;

/// Reasons a market instance is rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceError {
    /// No students or no schools.
    EmptyMarket,
    /// `m > n`.
    MoreSchoolsThanStudents { n: usize, m: usize },
    /// Declared counts disagree with the lengths of the supplied arrays.
    LengthMismatch { field: &'static str, expected: usize, found: usize },
    ZeroCapacity { school: usize },
    SchoolIndexOutOfRange { student: usize, school: u64, m: usize },
    DuplicateSchoolInList { student: usize, school: usize },
    /// A permutation array is not a bijection on `[0, n)`.
    NotAPermutation,
}

impl InstanceError {
    /// Stable class name, used in machine-readable error lines.
    pub fn class(&self) -> &'static str {
        match self {
            InstanceError::EmptyMarket => "EmptyMarket",
            InstanceError::MoreSchoolsThanStudents { .. } => "MoreSchoolsThanStudents",
            InstanceError::LengthMismatch { .. } => "LengthMismatch",
            InstanceError::ZeroCapacity { .. } => "ZeroCapacity",
            InstanceError::SchoolIndexOutOfRange { .. } => "SchoolIndexOutOfRange",
            InstanceError::DuplicateSchoolInList { .. } => "DuplicateSchoolInList",
            InstanceError::NotAPermutation => "NotAPermutation",
        }
    }
}

impl fmt::Display for InstanceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceError::EmptyMarket => write!(f, "market needs at least one student and one school"),
            InstanceError::MoreSchoolsThanStudents { n, m } => {
                write!(f, "{m} schools but only {n} students (need m <= n)")
            }
            InstanceError::LengthMismatch { field, expected, found } => {
                write!(f, "{field}: expected {expected} entries, found {found}")
            }
            InstanceError::ZeroCapacity { school } => write!(f, "school {school} has zero capacity"),
            InstanceError::SchoolIndexOutOfRange { student, school, m } => {
                write!(f, "student {student} lists school {school}, outside [0, {m})")
            }
            InstanceError::DuplicateSchoolInList { student, school } => {
                write!(f, "student {student} lists school {school} more than once")
            }
            InstanceError::NotAPermutation => write!(f, "order is not a permutation of [0, n)"),
        }
    }
}

/// A generator specification that cannot produce an instance.
#[derive(Debug, Clone, PartialEq)]
pub enum SpecError {
    /// Block profiles need `m | n` and every capacity equal to `n / m`.
    BlockShape { n: usize, m: usize },
    ListLength { length: usize, m: usize },
    Weights { reason: &'static str },
    /// The spec's own counts are inconsistent (see the wrapped error).
    Instance(InstanceError),
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecError::BlockShape { n, m } => {
                write!(f, "block profile needs m | n and capacities n/m (n={n}, m={m})")
            }
            SpecError::ListLength { length, m } => {
                write!(f, "list length {length} outside [1, {m}]")
            }
            SpecError::Weights { reason } => write!(f, "Plackett-Luce weights: {reason}"),
            SpecError::Instance(e) => write!(f, "{e}"),
        }
    }
}

impl From<InstanceError> for SpecError {
    fn from(e: InstanceError) -> Self {
        SpecError::Instance(e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    /// Enumeration is capped at [`crate::ORACLE_MAX_STUDENTS`] students.
    InstanceTooLarge { n: usize, max: usize },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::InstanceTooLarge { n, max } => {
                write!(f, "exact enumeration needs n <= {max}, got n = {n}")
            }
        }
    }
}

impl core::error::Error for InstanceError {}
impl core::error::Error for SpecError {}
impl core::error::Error for OracleError {}
