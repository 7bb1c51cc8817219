use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Requested icosphere order exceeds the configured guard.
    Capacity { order: u32, max_order: u32 },
    /// A 3-vector that should lie on the unit sphere does not.
    NonUnitVector { norm: f64 },
    /// Gnomonic input at or beyond 90 degrees from the tangent point.
    OutOfHemisphere,
    /// Mercator input beyond the configured latitude clamp.
    BeyondLatClamp { lat: f64, clamp: f64 },
    /// Scale factors are undefined at the poles.
    AtPole,
    /// Generic out-of-domain argument.
    Domain(&'static str),
    /// No face contains the query point; the mesh is corrupt.
    NotLocated,
    /// Buffer or shape sizes disagree.
    Dimension(&'static str),
    /// Signal, operator and mesh subdivision orders disagree.
    OrderMismatch { expected: u32, found: u32 },
    /// Class id outside `[0, num_classes)` or not an integer.
    ClassOutOfRange { value: f64, num_classes: u32 },
    /// A signal value is NaN or infinite.
    NonFinite,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Capacity { order, max_order } => write!(
                f,
                "icosphere order {order} exceeds the capacity guard (max order {max_order})"
            ),
            Error::NonUnitVector { norm } => {
                write!(f, "expected a unit vector, got norm {norm}")
            }
            Error::OutOfHemisphere => {
                write!(
                    f,
                    "point is at or beyond 90 degrees from the gnomonic center"
                )
            }
            Error::BeyondLatClamp { lat, clamp } => write!(
                f,
                "latitude {lat} rad exceeds the Mercator clamp of {clamp} rad"
            ),
            Error::AtPole => write!(f, "scale factors are undefined at the poles"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::NotLocated => write!(f, "point is not contained in any face"),
            Error::Dimension(msg) => write!(f, "dimension error: {msg}"),
            Error::OrderMismatch { expected, found } => {
                write!(f, "expected subdivision order {expected}, found {found}")
            }
            Error::ClassOutOfRange { value, num_classes } => write!(
                f,
                "class id {value} is not an integer in [0, {num_classes})"
            ),
            Error::NonFinite => write!(f, "signal contains NaN or infinite values"),
        }
    }
}

impl core::error::Error for Error {}
