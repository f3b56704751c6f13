use super::IntermediateResult;
use crate::program::Localizer;
use crate::scene::Frame;

/// Interval an anchor result pins on the timeline: the span of its
/// evidence, or nothing when the anchor found nothing.
pub fn ground(anchor: &IntermediateResult) -> Option<(Frame, Frame)> {
    if anchor.answer.is_positive() {
        anchor.evidence.span()
    } else {
        None
    }
}

/// Set of frames induced by a localizer and its anchors. All bounds are
/// strict except for `While`, which includes both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    After(Frame),
    Before(Frame),
    While(Frame, Frame),
    /// Frames strictly between the two bounds.
    Between(Frame, Frame),
}

impl Window {
    /// `anchors` holds one interval, or two for `Between`; the two are taken
    /// in (start, end) order regardless of program order.
    pub fn new(loc: Localizer, anchors: &[(Frame, Frame)]) -> Self {
        match loc {
            Localizer::After => Window::After(anchors[0].1),
            Localizer::Before => Window::Before(anchors[0].0),
            Localizer::While => Window::While(anchors[0].0, anchors[0].1),
            Localizer::Between => {
                let (a, b) = if anchors[0] <= anchors[1] {
                    (anchors[0], anchors[1])
                } else {
                    (anchors[1], anchors[0])
                };
                Window::Between(a.1, b.0)
            }
        }
    }

    pub fn contains(self, f: Frame) -> bool {
        match self {
            Window::After(end) => f > end,
            Window::Before(start) => f < start,
            Window::While(s, e) => s <= f && f <= e,
            Window::Between(lo, hi) => lo < f && f < hi,
        }
    }

    /// Whether any frame of `[s, e]` lies in the window.
    pub fn meets(self, s: Frame, e: Frame) -> bool {
        match self {
            Window::After(end) => e > end,
            Window::Before(start) => s < start,
            Window::While(ws, we) => s <= we && e >= ws,
            Window::Between(lo, hi) => {
                let first = s.max(lo.saturating_add(1));
                first <= e && first < hi
            }
        }
    }
}
