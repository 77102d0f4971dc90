//! Raw tactile frame-sequence file (`.tseq`): a one-line ASCII header
//! `TSEQ <count> <width> <height> <channels> <fps>` followed by the
//! concatenated raw 8-bit frames. Pre-extracted by the user; video
//! container decoding is out of scope.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::encoders::{Image, TactileClip};
use crate::error::{CoreError, Result};

pub fn write_tseq(path: &Path, clip: &TactileClip, fps: f64) -> Result<()> {
    let first = clip
        .frames()
        .first()
        .ok_or_else(|| CoreError::Input("cannot write an empty clip".into()))?;
    let (w, h, c) = (first.width(), first.height(), first.channels());
    if clip.frames().iter().any(|f| (f.width(), f.height(), f.channels()) != (w, h, c)) {
        return Err(CoreError::Shape("all frames in a tseq file must share dimensions".into()));
    }
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "TSEQ {} {} {} {} {}", clip.len(), w, h, c, fps)?;
    for frame in clip.frames() {
        let bytes: Vec<u8> = frame
            .pixels()
            .iter()
            .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect();
        file.write_all(&bytes)?;
    }
    Ok(())
}

pub fn read_tseq(path: &Path, sensor_id: &str) -> Result<TactileClip> {
    let file = std::fs::File::open(path)
        .map_err(|e| CoreError::Input(format!("cannot open {}: {e}", path.display())))?;
    let mut reader = BufReader::new(file);
    let mut header = String::new();
    reader.read_line(&mut header)?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 6 || fields[0] != "TSEQ" {
        return Err(CoreError::Input(format!(
            "{}: bad tseq header '{}'",
            path.display(),
            header.trim()
        )));
    }
    let parse = |s: &str, what: &str| -> Result<usize> {
        s.parse()
            .map_err(|_| CoreError::Input(format!("{}: bad {what} '{s}'", path.display())))
    };
    let count = parse(fields[1], "frame count")?;
    let width = parse(fields[2], "width")?;
    let height = parse(fields[3], "height")?;
    let channels = parse(fields[4], "channel count")?;
    let fps: f64 = fields[5]
        .parse()
        .map_err(|_| CoreError::Input(format!("{}: bad fps '{}'", path.display(), fields[5])))?;
    if !(fps > 0.0 && fps <= 1000.0) {
        return Err(CoreError::Input(format!("{}: fps must be in (0, 1000]", path.display())));
    }

    let frame_len = width * height * channels;
    let mut frames = Vec::with_capacity(count);
    let mut timestamps = Vec::with_capacity(count);
    let mut buf = vec![0u8; frame_len];
    for i in 0..count {
        reader.read_exact(&mut buf).map_err(|e| {
            CoreError::Input(format!("{}: truncated at frame {i}: {e}", path.display()))
        })?;
        let pixels = buf.iter().map(|&b| f64::from(b) / 255.0).collect();
        frames.push(Image::new(width, height, channels, pixels)?);
        timestamps.push((i as f64 * 1000.0 / fps).round() as i64);
    }
    TactileClip::new(frames, timestamps, sensor_id.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_frames_and_timing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("clip.tseq");
        let clip = TactileClip::synthetic(20.0, 10, 6, 4, "gel-0").unwrap();
        write_tseq(&path, &clip, 20.0).unwrap();
        let back = read_tseq(&path, "gel-0").unwrap();
        assert_eq!(back.len(), 10);
        assert_eq!(back.timestamps_ms(), clip.timestamps_ms());
        for (a, b) in back.frames().iter().zip(clip.frames()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn truncated_file_is_input_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.tseq");
        std::fs::write(&path, "TSEQ 3 4 4 1 20\n\x01\x02").unwrap();
        assert!(matches!(read_tseq(&path, "g"), Err(CoreError::Input(_))));
    }

    #[test]
    fn bad_header_is_input_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.tseq");
        std::fs::write(&path, "NOPE\n").unwrap();
        assert!(matches!(read_tseq(&path, "g"), Err(CoreError::Input(_))));
    }
}
