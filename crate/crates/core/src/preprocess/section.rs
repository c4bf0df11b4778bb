use ndarray::{Array2, Array3, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::SeismicVolume;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SectionAxis {
    Inline,
    Crossline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SectionRef {
    pub axis: SectionAxis,
    pub index: usize,
}

/// A 2D slice of a volume: rows run along the sample (time/depth) axis,
/// columns along the remaining lateral axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub values: Array2<f32>,
    pub axis: SectionAxis,
    pub index: usize,
}

impl Section {
    pub fn dims(&self) -> (usize, usize) {
        self.values.dim()
    }

    pub fn reference(&self) -> SectionRef {
        SectionRef {
            axis: self.axis,
            index: self.index,
        }
    }
}

pub fn extract_section(volume: &SeismicVolume, axis: SectionAxis, index: usize) -> Result<Section> {
    let (ni, nx, _) = volume.dims();
    let (array_axis, len) = match axis {
        SectionAxis::Inline => (Axis(0), ni),
        SectionAxis::Crossline => (Axis(1), nx),
    };
    if index >= len {
        return Err(Error::IndexOutOfRange { index, len });
    }
    let slice = volume.samples().index_axis_move(array_axis, index);
    Ok(Section {
        values: slice.t().as_standard_layout().into_owned(),
        axis,
        index,
    })
}

/// Reassembles a full set of same-axis sections, ordered by index, into a
/// volume sample grid. Inverse of extracting every section along one axis.
pub fn restack(sections: &[Section]) -> Result<Array3<f32>> {
    let first = sections
        .first()
        .ok_or_else(|| Error::InvalidArgument("no sections to restack".into()))?;
    let (ns, lateral) = first.dims();
    let n = sections.len();
    let dims = match first.axis {
        SectionAxis::Inline => (n, lateral, ns),
        SectionAxis::Crossline => (lateral, n, ns),
    };
    let mut out = Array3::<f32>::zeros(dims);
    for (pos, s) in sections.iter().enumerate() {
        if s.axis != first.axis || s.dims() != (ns, lateral) || s.index != pos {
            return Err(Error::InvalidArgument(format!(
                "section {pos} does not continue a contiguous {:?} stack",
                first.axis
            )));
        }
        let target = match s.axis {
            SectionAxis::Inline => Axis(0),
            SectionAxis::Crossline => Axis(1),
        };
        out.index_axis_mut(target, pos).assign(&s.values.t());
    }
    Ok(out)
}
