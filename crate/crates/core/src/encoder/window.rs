use crate::nn::Scalar;
use crate::{Error, Result};

/// `H` consecutive observations, oldest row first.
///
/// Only the trailing `valid_count` rows are real observations. Earlier rows
/// are padding and always repeat the first valid row, i.e. the first
/// observation of the episode.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryWindow<T> {
    rows: Vec<T>,
    width: usize,
    valid_count: usize,
}

impl<T: Scalar> HistoryWindow<T> {
    /// Builds a window from its flat row-major contents and checks the
    /// padding rule.
    pub fn new(rows: Vec<T>, width: usize, valid_count: usize) -> Result<Self> {
        if width == 0 || rows.is_empty() || rows.len() % width != 0 {
            return Err(Error::contract(format!(
                "window of {} values does not split into rows of width {width}",
                rows.len()
            )));
        }
        let length = rows.len() / width;
        if valid_count == 0 || valid_count > length {
            return Err(Error::contract(format!(
                "valid_count {valid_count} outside [1, {length}]"
            )));
        }
        if rows.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("window values must be finite"));
        }
        let first_valid = length - valid_count;
        let anchor = &rows[first_valid * width..(first_valid + 1) * width];
        if (0..first_valid).any(|i| &rows[i * width..(i + 1) * width] != anchor) {
            return Err(Error::contract(
                "padding rows must repeat the first valid observation",
            ));
        }
        Ok(Self {
            rows,
            width,
            valid_count,
        })
    }

    /// A window with every row valid.
    pub fn full(rows: Vec<T>, width: usize) -> Result<Self> {
        let length = if width == 0 { 0 } else { rows.len() / width };
        Self::new(rows, width, length)
    }

    /// Pads `valid` (oldest first, at most `window_length` rows) up to
    /// `window_length` by repeating its first row.
    pub fn from_valid<R: AsRef<[T]>>(valid: &[R], window_length: usize) -> Result<Self> {
        if valid.is_empty() || valid.len() > window_length {
            return Err(Error::contract(format!(
                "{} valid rows for a window of length {window_length}",
                valid.len()
            )));
        }
        let width = valid[0].as_ref().len();
        if valid.iter().any(|r| r.as_ref().len() != width) {
            return Err(Error::contract("window rows have different widths"));
        }
        let mut rows = Vec::with_capacity(window_length * width);
        for _ in 0..window_length - valid.len() {
            rows.extend_from_slice(valid[0].as_ref());
        }
        for row in valid {
            rows.extend_from_slice(row.as_ref());
        }
        Self::new(rows, width, valid.len())
    }

    /// The window at the start of an episode: `first` repeated `window_length` times.
    pub fn start(first: &[T], window_length: usize) -> Result<Self> {
        Self::from_valid(&[first], window_length)
    }

    /// Drops the oldest row and appends `next`.
    pub fn shifted(&self, next: &[T]) -> Result<Self> {
        if next.len() != self.width {
            return Err(Error::contract(format!(
                "next observation has width {}, window rows have width {}",
                next.len(),
                self.width
            )));
        }
        let mut rows = Vec::with_capacity(self.rows.len());
        rows.extend_from_slice(&self.rows[self.width..]);
        rows.extend_from_slice(next);
        let valid = (self.valid_count + 1).min(self.window_length());
        Self::new(rows, self.width, valid)
    }

    pub fn window_length(&self) -> usize {
        self.rows.len() / self.width
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn valid_count(&self) -> usize {
        self.valid_count
    }

    pub fn row(&self, index: usize) -> &[T] {
        &self.rows[index * self.width..(index + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.rows.chunks_exact(self.width)
    }

    /// The newest observation.
    pub fn current(&self) -> &[T] {
        self.row(self.window_length() - 1)
    }

    pub fn as_flat(&self) -> &[T] {
        &self.rows
    }

    pub fn cast<U: Scalar>(&self) -> HistoryWindow<U> {
        HistoryWindow {
            rows: crate::nn::cast_slice(&self.rows),
            width: self.width,
            valid_count: self.valid_count,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn start_repeats_first_observation() {
        let w = HistoryWindow::start(&[1.0f32, 2.0], 3).unwrap();
        assert_eq!(w.as_flat(), &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        assert_eq!(w.valid_count(), 1);
    }

    #[test]
    fn shifting_fills_then_slides() {
        let mut w = HistoryWindow::start(&[0.0f64], 3).unwrap();
        for (i, expected) in [[0.0, 0.0, 1.0], [0.0, 1.0, 2.0], [1.0, 2.0, 3.0]].iter().enumerate() {
            w = w.shifted(&[(i + 1) as f64]).unwrap();
            assert_eq!(w.as_flat(), expected);
        }
        assert_eq!(w.valid_count(), 3);
        assert_eq!(w.current(), &[3.0]);
    }

    #[test]
    fn rejects_bad_padding_and_non_finite_values() {
        assert!(HistoryWindow::new(vec![1.0f32, 2.0, 3.0], 1, 2).is_err());
        assert!(HistoryWindow::new(vec![2.0f32, 2.0, 3.0], 1, 2).is_ok());
        assert!(HistoryWindow::new(vec![f32::NAN], 1, 1).is_err());
        assert!(HistoryWindow::new(vec![1.0f32, 2.0], 1, 0).is_err());
        assert!(HistoryWindow::<f32>::from_valid(&[[1.0f32], [2.0], [3.0]], 2).is_err());
    }
}
