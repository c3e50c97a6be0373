//! Point-cloud ingestion, voxelization and ground-slab extraction.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::geom::Point3;

#[derive(Debug, Clone, Default)]
pub struct PointCloud {
    pub points: Vec<Point3>,
    pub source_path: String,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub type CellIndex = (i64, i64, i64);

/// Uniform grid over a cloud; each occupied cell holds point indices.
#[derive(Debug, Clone)]
pub struct VoxelGrid {
    pub resolution: f64,
    pub origin: Point3,
    pub cells: BTreeMap<CellIndex, Vec<usize>>,
}

#[derive(Debug, Error)]
pub enum CloudError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed coordinate token `{token}`")]
    Malformed {
        path: PathBuf,
        line: usize,
        token: String,
    },
    #[error("{path}:{line}: expected at least 3 coordinates")]
    ShortLine { path: PathBuf, line: usize },
    #[error("no points parsed from {0}")]
    NoPoints(PathBuf),
    #[error("no .xyz files in directory {0}")]
    EmptyDirectory(PathBuf),
    #[error("voxel resolution must be positive, got {0}")]
    BadResolution(f64),
    #[error("operation on an empty cloud")]
    EmptyCloud,
}

/// Parse an ASCII XYZ file: one `x y z` triple per line, meters,
/// `#`-comments and blank lines skipped, extra columns ignored.
pub fn load_xyz(path: &Path) -> Result<PointCloud, CloudError> {
    let text = fs::read_to_string(path).map_err(|source| CloudError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut points = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut coords = [0.0f64; 3];
        let mut tokens = trimmed.split_whitespace();
        for c in &mut coords {
            let tok = tokens.next().ok_or_else(|| CloudError::ShortLine {
                path: path.to_path_buf(),
                line: line_no,
            })?;
            *c = tok.parse::<f64>().map_err(|_| CloudError::Malformed {
                path: path.to_path_buf(),
                line: line_no,
                token: tok.to_string(),
            })?;
            if !c.is_finite() {
                return Err(CloudError::Malformed {
                    path: path.to_path_buf(),
                    line: line_no,
                    token: tok.to_string(),
                });
            }
        }
        points.push(Point3::new(coords[0], coords[1], coords[2]));
    }
    if points.is_empty() {
        return Err(CloudError::NoPoints(path.to_path_buf()));
    }
    Ok(PointCloud {
        points,
        source_path: path.display().to_string(),
    })
}

/// Concatenate every `*.xyz` file of a scene directory in lexicographic
/// path order.
pub fn load_dir(dir: &Path) -> Result<PointCloud, CloudError> {
    let entries = fs::read_dir(dir).map_err(|source| CloudError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "xyz"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CloudError::EmptyDirectory(dir.to_path_buf()));
    }
    let mut points = Vec::new();
    for p in &paths {
        points.extend(load_xyz(p)?.points);
    }
    Ok(PointCloud {
        points,
        source_path: dir.display().to_string(),
    })
}

/// Serialize points at 6 decimal digits, one per line.
pub fn write_xyz(path: &Path, points: &[Point3]) -> std::io::Result<()> {
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    for p in points {
        writeln!(w, "{:.6} {:.6} {:.6}", p.x, p.y, p.z)?;
    }
    w.flush()
}

/// Bin points into cubic cells of side `resolution`, origin at the
/// componentwise minimum of the cloud.
pub fn voxelize(cloud: &PointCloud, resolution: f64) -> Result<VoxelGrid, CloudError> {
    if !(resolution > 0.0) {
        return Err(CloudError::BadResolution(resolution));
    }
    if cloud.is_empty() {
        return Err(CloudError::EmptyCloud);
    }
    let origin = crate::geom::aabb_from_points(&cloud.points)
        .expect("non-empty cloud")
        .min;
    let mut cells: BTreeMap<CellIndex, Vec<usize>> = BTreeMap::new();
    for (i, p) in cloud.points.iter().enumerate() {
        let cell = (
            ((p.x - origin.x) / resolution).floor() as i64,
            ((p.y - origin.y) / resolution).floor() as i64,
            ((p.z - origin.z) / resolution).floor() as i64,
        );
        cells.entry(cell).or_default().push(i);
    }
    Ok(VoxelGrid {
        resolution,
        origin,
        cells,
    })
}

/// Split a cloud into (ground, rest). Ground is the densest z-slab of
/// thickness `slab_thickness` among the bins starting in the lowest 25%
/// of the z range.
pub fn remove_ground(
    cloud: &PointCloud,
    slab_thickness: f64,
) -> Result<(PointCloud, PointCloud), CloudError> {
    if cloud.is_empty() {
        return Err(CloudError::EmptyCloud);
    }
    debug_assert!(slab_thickness > 0.0);
    let z_min = cloud.points.iter().map(|p| p.z).fold(f64::INFINITY, f64::min);
    let z_max = cloud.points.iter().map(|p| p.z).fold(f64::NEG_INFINITY, f64::max);
    let z_range = z_max - z_min;

    let bin_count = ((z_range / slab_thickness).floor() as usize + 1).max(1);
    let mut histogram = vec![0usize; bin_count];
    for p in &cloud.points {
        let bin = (((p.z - z_min) / slab_thickness).floor() as usize).min(bin_count - 1);
        histogram[bin] += 1;
    }

    // Candidate bins: lower edge within the lowest quarter of the range.
    let cutoff = z_min + 0.25 * z_range;
    let mut best_bin = 0usize;
    let mut best_pop = 0usize;
    for (i, &pop) in histogram.iter().enumerate() {
        let lower_edge = z_min + i as f64 * slab_thickness;
        if lower_edge > cutoff && i > 0 {
            break;
        }
        if pop > best_pop {
            best_pop = pop;
            best_bin = i;
        }
    }
    let slab_lo = z_min + best_bin as f64 * slab_thickness;
    let slab_hi = slab_lo + slab_thickness;

    let mut ground = Vec::new();
    let mut rest = Vec::new();
    for p in &cloud.points {
        if p.z >= slab_lo && p.z <= slab_hi {
            ground.push(*p);
        } else {
            rest.push(*p);
        }
    }
    Ok((
        PointCloud {
            points: ground,
            source_path: cloud.source_path.clone(),
        },
        PointCloud {
            points: rest,
            source_path: cloud.source_path.clone(),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(".xyz").tempfile().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_minimal_file() {
        let f = write_temp("0 0 0\n1 2 3\n");
        let cloud = load_xyz(f.path()).unwrap();
        assert_eq!(cloud.len(), 2);
        assert_eq!(cloud.points[1], Point3::new(1.0, 2.0, 3.0));
    }

    #[test]
    fn comments_and_extra_columns_skipped() {
        let f = write_temp("# header\n\n1 2 3 255 255 255\n");
        let cloud = load_xyz(f.path()).unwrap();
        assert_eq!(cloud.len(), 1);
    }

    #[test]
    fn malformed_token_reports_line() {
        let f = write_temp("1 2 x\n");
        match load_xyz(f.path()) {
            Err(CloudError::Malformed { line, token, .. }) => {
                assert_eq!(line, 1);
                assert_eq!(token, "x");
            }
            other => panic!("expected malformed error, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_rejected() {
        let f = write_temp("# only a comment\n");
        assert!(matches!(load_xyz(f.path()), Err(CloudError::NoPoints(_))));
    }

    #[test]
    fn load_serialize_roundtrip() {
        let f = write_temp("0.123456 -7.5 3.000001\n10 20 30\n");
        let cloud = load_xyz(f.path()).unwrap();
        let out = tempfile::Builder::new().suffix(".xyz").tempfile().unwrap();
        write_xyz(out.path(), &cloud.points).unwrap();
        let reloaded = load_xyz(out.path()).unwrap();
        assert_eq!(cloud.len(), reloaded.len());
        for (a, b) in cloud.points.iter().zip(&reloaded.points) {
            assert!((a.x - b.x).abs() < 1e-6);
            assert!((a.y - b.y).abs() < 1e-6);
            assert!((a.z - b.z).abs() < 1e-6);
        }
    }

    fn cloud_of(points: Vec<Point3>) -> PointCloud {
        PointCloud {
            points,
            source_path: "test".into(),
        }
    }

    #[test]
    fn close_points_share_cell() {
        let cloud = cloud_of(vec![Point3::new(0.0, 0.0, 0.0), Point3::new(0.3, 0.0, 0.0)]);
        let grid = voxelize(&cloud, 1.0).unwrap();
        assert_eq!(grid.cells.len(), 1);
    }

    #[test]
    fn separated_points_split_cells() {
        let cloud = cloud_of(vec![Point3::new(0.0, 0.0, 0.0), Point3::new(1.5, 0.0, 0.0)]);
        let grid = voxelize(&cloud, 1.0).unwrap();
        assert_eq!(grid.cells.len(), 2);
    }

    #[test]
    fn uniform_grid_one_point_per_cell() {
        let mut pts = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                for k in 0..10 {
                    // offset to cell centers so floor() is unambiguous
                    pts.push(Point3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5));
                }
            }
        }
        let cloud = cloud_of(pts);
        let grid = voxelize(&cloud, 1.0).unwrap();
        assert_eq!(grid.cells.len(), 1000);
        assert!(grid.cells.values().all(|v| v.len() == 1));
        let total: usize = grid.cells.values().map(|v| v.len()).sum();
        assert_eq!(total, cloud.len());
    }

    #[test]
    fn bad_resolution_rejected() {
        let cloud = cloud_of(vec![Point3::new(0.0, 0.0, 0.0)]);
        assert!(matches!(voxelize(&cloud, 0.0), Err(CloudError::BadResolution(_))));
    }

    #[test]
    fn ground_plane_separated_from_mast() {
        let mut pts = Vec::new();
        for i in 0..40 {
            for j in 0..40 {
                pts.push(Point3::new(i as f64 * 0.25, j as f64 * 0.25, 0.0));
            }
        }
        let plane_count = pts.len();
        for k in 0..60 {
            pts.push(Point3::new(5.0, 5.0, 0.5 + k as f64 * 0.1));
        }
        let cloud = cloud_of(pts);
        let (ground, rest) = remove_ground(&cloud, 0.30).unwrap();
        assert_eq!(ground.len() + rest.len(), cloud.len());
        // all plane points must land in the ground partition
        let plane_in_ground = ground.points.iter().filter(|p| p.z == 0.0).count();
        assert!(plane_in_ground as f64 >= 0.99 * plane_count as f64);
        assert!(rest.points.iter().all(|p| p.z > 0.3));
    }

    #[test]
    fn uniform_z_still_partitions() {
        let pts: Vec<Point3> = (0..100)
            .map(|i| Point3::new(0.0, 0.0, i as f64 * 0.05))
            .collect();
        let cloud = cloud_of(pts);
        let (ground, rest) = remove_ground(&cloud, 0.30).unwrap();
        assert_eq!(ground.len() + rest.len(), cloud.len());
        assert!(!ground.is_empty());
    }

    #[test]
    fn empty_cloud_rejected() {
        let cloud = cloud_of(vec![]);
        assert!(matches!(remove_ground(&cloud, 0.3), Err(CloudError::EmptyCloud)));
    }
}
