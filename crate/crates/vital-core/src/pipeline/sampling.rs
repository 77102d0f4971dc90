//! Temporal frame sampling: reduce a recorded clip to representative
//! frames at a fixed stride while preserving order.

use crate::encoders::TactileClip;
use crate::error::{CoreError, Result};

/// Keep the frames nearest (at or before) times `0, stride, 2*stride,
/// ...` up to the last timestamp. The stride must be at least the
/// clip's frame period so no frame is selected twice.
pub fn sample_frames(clip: &TactileClip, stride_ms: i64) -> Result<TactileClip> {
    if clip.is_empty() {
        return Err(CoreError::Input("cannot sample an empty clip".into()));
    }
    if stride_ms <= 0 {
        return Err(CoreError::Input(format!("stride must be positive, got {stride_ms}")));
    }
    let timestamps = clip.timestamps_ms();
    if let Some(period) = timestamps.windows(2).map(|w| w[1] - w[0]).min() {
        if stride_ms < period {
            return Err(CoreError::Input(format!(
                "stride {stride_ms} ms is below the frame period {period} ms"
            )));
        }
    }

    let last = *timestamps.last().expect("nonempty");
    let mut frames = Vec::new();
    let mut kept_ts = Vec::new();
    let mut cursor = 0usize;
    let mut target = timestamps[0];
    while target <= last {
        // nearest frame at or before the target time
        while cursor + 1 < timestamps.len() && timestamps[cursor + 1] <= target {
            cursor += 1;
        }
        frames.push(clip.frames()[cursor].clone());
        kept_ts.push(timestamps[cursor]);
        target += stride_ms;
    }
    TactileClip::new(frames, kept_ts, clip.sensor_id().to_string())
}

/// Indices (into the source clip) that [`sample_frames`] keeps.
pub fn sample_indices(timestamps: &[i64], stride_ms: i64) -> Vec<usize> {
    let mut indices = Vec::new();
    if timestamps.is_empty() {
        return indices;
    }
    let last = *timestamps.last().unwrap();
    let mut cursor = 0usize;
    let mut target = timestamps[0];
    while target <= last {
        while cursor + 1 < timestamps.len() && timestamps[cursor + 1] <= target {
            cursor += 1;
        }
        indices.push(cursor);
        target += stride_ms;
    }
    indices
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_fps_six_seconds_at_250ms_gives_24_frames() {
        let clip = TactileClip::synthetic(20.0, 120, 4, 4, "gel-0").unwrap();
        let sampled = sample_frames(&clip, 250).unwrap();
        assert_eq!(sampled.len(), 24);
        let want: Vec<usize> = (0..24).map(|i| i * 5).collect();
        assert_eq!(sample_indices(clip.timestamps_ms(), 250), want);
    }

    #[test]
    fn one_second_clip_gives_four_frames() {
        let clip = TactileClip::synthetic(20.0, 20, 4, 4, "gel-0").unwrap();
        assert_eq!(sample_indices(clip.timestamps_ms(), 250), vec![0, 5, 10, 15]);
    }

    #[test]
    fn stride_equal_to_period_keeps_everything() {
        let clip = TactileClip::synthetic(20.0, 12, 4, 4, "gel-0").unwrap();
        let sampled = sample_frames(&clip, 50).unwrap();
        assert_eq!(sampled.len(), 12);
        assert_eq!(sampled.timestamps_ms(), clip.timestamps_ms());
    }

    #[test]
    fn empty_clip_is_input_error() {
        let clip = TactileClip::new(vec![], vec![], "gel-0".into()).unwrap();
        assert!(matches!(sample_frames(&clip, 250), Err(CoreError::Input(_))));
    }

    #[test]
    fn stride_below_period_rejected() {
        let clip = TactileClip::synthetic(20.0, 10, 4, 4, "gel-0").unwrap();
        assert!(matches!(sample_frames(&clip, 10), Err(CoreError::Input(_))));
    }

    #[test]
    fn target_between_frames_takes_earlier_frame() {
        // irregular timestamps: 0, 100, 300; stride 150 -> targets 0, 150, 300
        let frames = vec![
            crate::encoders::Image::new(2, 2, 1, vec![0.0; 4]).unwrap(),
            crate::encoders::Image::new(2, 2, 1, vec![0.5; 4]).unwrap(),
            crate::encoders::Image::new(2, 2, 1, vec![1.0; 4]).unwrap(),
        ];
        let clip = TactileClip::new(frames, vec![0, 100, 300], "g".into()).unwrap();
        assert_eq!(sample_indices(clip.timestamps_ms(), 150), vec![0, 1, 2]);
    }
}
