//! Image files on disk and dataset discovery.

use std::path::{Path, PathBuf};

use image::{ColorType, ExtendedColorType, ImageFormat};
use walkdir::WalkDir;

use crate::error::{Error, Result};
use crate::image::PlanarImage;

const EXTENSIONS: [&str; 4] = ["png", "jpg", "jpeg", "bmp"];

/// Loads an 8- or 16-bit file. Grey inputs keep one channel; everything else
/// becomes RGB with any alpha dropped.
pub fn load_image(path: &Path) -> Result<PlanarImage> {
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img.color() {
        ColorType::L8 | ColorType::La8 | ColorType::L16 | ColorType::La16 => {
            PlanarImage::from_interleaved_u8(w, h, 1, img.to_luma8().as_raw())
        }
        _ => PlanarImage::from_interleaved_u8(w, h, 3, img.to_rgb8().as_raw()),
    }
}

/// Writes an 8-bit PNG, creating parent directories as needed.
pub fn save_png(path: &Path, image: &PlanarImage) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let color = match image.channels() {
        1 => ExtendedColorType::L8,
        _ => ExtendedColorType::Rgb8,
    };
    image::save_buffer_with_format(
        path,
        &image.to_interleaved_u8(),
        image.width() as u32,
        image.height() as u32,
        color,
        ImageFormat::Png,
    )
    .map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        .unwrap_or(false)
}

/// Image files under `root`, keyed by `/`-separated relative path, sorted by key.
pub fn discover_images(root: &Path) -> Result<Vec<(String, PathBuf)>> {
    if !root.is_dir() {
        return Err(Error::io(
            root,
            std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
        ));
    }
    let mut found = Vec::new();
    for entry in WalkDir::new(root).follow_links(true) {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(root).to_path_buf();
            Error::io(path, e.into())
        })?;
        if !entry.file_type().is_file() || !is_image(entry.path()) {
            continue;
        }
        let rel = entry.path().strip_prefix(root).expect("walkdir stays under root");
        let key = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        found.push((key, entry.path().to_path_buf()));
    }
    found.sort();
    Ok(found)
}

/// `a/b.jpg` -> `a/b`.
pub fn strip_extension(key: &str) -> String {
    match key.rfind('.') {
        Some(dot) if !key[dot..].contains('/') => key[..dot].to_string(),
        _ => key.to_string(),
    }
}

/// Relative output path for an image key: same stem, `.png` extension.
pub fn png_rel_path(key: &str) -> PathBuf {
    PathBuf::from(format!("{}.png", strip_extension(key)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::natural_scene;

    #[test]
    fn png_round_trip_is_exact_on_quantized_data() {
        let dir = tempfile::tempdir().unwrap();
        let img = natural_scene(1, 23, 17);
        let q = PlanarImage::from_interleaved_u8(23, 17, 3, &img.to_interleaved_u8()).unwrap();
        let path = dir.path().join("x/y.png");
        save_png(&path, &img).unwrap();
        assert_eq!(load_image(&path).unwrap(), q);

        let grey = PlanarImage::filled(5, 4, 1, 0.5).unwrap();
        save_png(&dir.path().join("g.png"), &grey).unwrap();
        assert_eq!(load_image(&dir.path().join("g.png")).unwrap().channels(), 1);
    }

    #[test]
    fn discovery_is_sorted_and_relative() {
        let dir = tempfile::tempdir().unwrap();
        let img = PlanarImage::filled(4, 4, 3, 0.2).unwrap();
        for name in ["b.png", "a/c.png", "a.png"] {
            save_png(&dir.path().join(name), &img).unwrap();
        }
        std::fs::write(dir.path().join("notes.txt"), "x").unwrap();
        let keys: Vec<String> = discover_images(dir.path())
            .unwrap()
            .into_iter()
            .map(|(k, _)| k)
            .collect();
        assert_eq!(keys, ["a.png", "a/c.png", "b.png"]);
        assert!(discover_images(&dir.path().join("missing")).is_err());
    }

    #[test]
    fn stems() {
        assert_eq!(strip_extension("a/b.c.jpg"), "a/b.c");
        assert_eq!(strip_extension("a.d/b"), "a.d/b");
        assert_eq!(png_rel_path("x/y.JPG"), PathBuf::from("x/y.png"));
    }

    #[test]
    fn unreadable_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("broken.png");
        std::fs::write(&path, b"not a png").unwrap();
        assert!(matches!(load_image(&path), Err(Error::Image { .. })));
    }
}
