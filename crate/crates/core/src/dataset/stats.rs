use std::fmt;

use super::labels::{Annotation, LightClass};

/// Per-class image presence and instance counts.
///
/// An image with boxes of several classes counts once for each of them, so
/// presence fractions may add up to more than one.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassStatistics {
    pub images: usize,
    pub images_with: [usize; 3],
    pub instances: [usize; 3],
}

impl ClassStatistics {
    pub fn add_image(&mut self, annotations: &[Annotation]) {
        self.images += 1;
        let mut present = [false; 3];
        for a in annotations {
            self.instances[a.class.index()] += 1;
            present[a.class.index()] = true;
        }
        for (count, p) in self.images_with.iter_mut().zip(present) {
            *count += p as usize;
        }
    }

    /// Fraction of images containing at least one `class` box; 0 for no images.
    pub fn presence(&self, class: LightClass) -> f64 {
        if self.images == 0 {
            0.0
        } else {
            self.images_with[class.index()] as f64 / self.images as f64
        }
    }

    pub fn percent(&self, class: LightClass) -> f64 {
        100.0 * self.presence(class)
    }
}

impl fmt::Display for ClassStatistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<10}{:>10}{:>10}{:>10}", "", "#Red", "#Green", "#Yellow")?;
        write!(f, "{:<10}", "images")?;
        for c in LightClass::ALL {
            write!(f, "{:>9.2}%", self.percent(c))?;
        }
        writeln!(f)?;
        write!(f, "{:<10}", "instances")?;
        for c in LightClass::ALL {
            write!(f, "{:>10}", self.instances[c.index()])?;
        }
        writeln!(f)?;
        writeln!(f, "total images: {}", self.images)
    }
}

pub fn class_statistics<'a, I>(images: I) -> ClassStatistics
where
    I: IntoIterator<Item = &'a [Annotation]>,
{
    let mut stats = ClassStatistics::default();
    for anns in images {
        stats.add_image(anns);
    }
    stats
}
