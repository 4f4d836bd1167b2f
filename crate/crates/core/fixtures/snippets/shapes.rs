use std::fmt;

pub struct Circle {
    r: f64,
}

impl Circle {
    pub fn area(&self) -> f64 {
        3.14159 * self.r * self.r
    }

    // Classify by size.
    pub fn label<'a>(&self, small: &'a str) -> &'a str {
        if self.r < 1.0 || self.r.is_nan() {
            small
        } else {
            "large"
        }
    }
}

fn helper(xs: &[u32]) -> u32 {
    let mut t = 0;
    for x in xs {
        if *x > 2 && *x < 10 { t += x; }
    }
    t
}
