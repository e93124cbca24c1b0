use super::StimuliError;

/// Binary object silhouette, row-major, `true` where the object is.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl ObjectMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self, StimuliError> {
        if width * height != bits.len() {
            return Err(StimuliError::MalformedImage(format!(
                "{width}x{height} mask with {} bits",
                bits.len()
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        f: impl Fn(usize, usize) -> bool,
    ) -> Result<Self, StimuliError> {
        let bits = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(width, height, bits)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn area(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}

/// Intersection over union `|a ∩ b| / |a ∪ b|`.
pub fn jaccard(a: &ObjectMask, b: &ObjectMask) -> Result<f64, StimuliError> {
    if a.width != b.width || a.height != b.height {
        return Err(StimuliError::MalformedImage(format!(
            "mask sizes differ: {}x{} vs {}x{}",
            a.width, a.height, b.width, b.height
        )));
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.bits.iter().zip(&b.bits) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    if union == 0 {
        return Err(StimuliError::UndefinedJaccard(format!(
            "{}x{} masks",
            a.width, a.height
        )));
    }
    Ok(inter as f64 / union as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mask(w: usize, h: usize, on: &[(usize, usize)]) -> ObjectMask {
        ObjectMask::from_fn(w, h, |x, y| on.contains(&(x, y))).unwrap()
    }

    #[test]
    fn identical_masks() {
        let a = mask(4, 4, &[(0, 0), (1, 1), (2, 2)]);
        assert_eq!(jaccard(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn disjoint_masks() {
        let a = mask(4, 4, &[(0, 0), (1, 0)]);
        let b = mask(4, 4, &[(3, 3), (2, 3)]);
        assert_eq!(jaccard(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn two_shared_of_four() {
        let a = mask(4, 4, &[(0, 0), (1, 0), (2, 0), (3, 0)]);
        let b = mask(4, 4, &[(2, 0), (3, 0), (0, 1), (1, 1)]);
        assert_eq!(jaccard(&a, &b).unwrap(), 2.0 / 6.0);
    }

    #[test]
    fn empty_union_is_an_error() {
        let a = mask(3, 3, &[]);
        assert!(matches!(jaccard(&a, &a), Err(StimuliError::UndefinedJaccard(_))));
    }

    #[test]
    fn size_mismatch() {
        let a = mask(3, 3, &[(0, 0)]);
        let b = mask(3, 2, &[(0, 0)]);
        assert!(matches!(jaccard(&a, &b), Err(StimuliError::MalformedImage(_))));
        assert!(ObjectMask::new(2, 2, vec![true; 3]).is_err());
    }

    proptest! {
        #[test]
        fn symmetric_and_reflexive(a in proptest::collection::vec(any::<bool>(), 25),
                                   b in proptest::collection::vec(any::<bool>(), 25)) {
            let ma = ObjectMask::new(5, 5, a).unwrap();
            let mb = ObjectMask::new(5, 5, b).unwrap();
            match (jaccard(&ma, &mb), jaccard(&mb, &ma)) {
                (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "asymmetric outcome"),
            }
            if ma.area() > 0 {
                prop_assert_eq!(jaccard(&ma, &ma).unwrap(), 1.0);
            }
        }
    }
}
