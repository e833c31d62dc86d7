//! Fixed formatting for numeric output.

/// 17 significant digits, scientific notation. Round-trips every `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::num;

    #[test]
    fn round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.652417469626003, 1e-300, 6.02e23] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(0.25), "2.5000000000000000e-1");
    }
}
