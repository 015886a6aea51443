/// Plane rotation `[c s; -s c]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GivensRotation {
    pub c: f64,
    pub s: f64,
}

impl GivensRotation {
    pub const IDENTITY: Self = Self { c: 1.0, s: 0.0 };

    /// The rotation mapping `(a, b)` to `(r, 0)` with `r = hypot(a, b)`.
    /// A zero pair yields the identity.
    pub fn annihilating(a: f64, b: f64) -> Self {
        let r = a.hypot(b);
        if r == 0.0 {
            Self::IDENTITY
        } else {
            Self { c: a / r, s: b / r }
        }
    }

    #[inline]
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (self.c * x + self.s * y, -self.s * x + self.c * y)
    }
}
