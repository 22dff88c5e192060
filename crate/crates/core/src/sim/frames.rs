//! SVG frame export: contamination in red, cleaned region in green, sensor
//! fans and sweeper centers on top. One file per frame plus a manifest
//! listing the simulated time of every frame.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geometry::{Point2, SectorFan, SensorGeometry, SweeperPose};
use crate::sim::{FrameSink, WorldGrid};

/// Writes `frame_%06d.svg` files plus `manifest.csv` into a directory.
pub struct SvgFrameWriter {
    dir: PathBuf,
    r0: f64,
    count: u32,
    manifest: Vec<(u32, String, f64)>,
}

impl SvgFrameWriter {
    pub fn new(dir: &Path, r0: f64) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            r0,
            count: 0,
            manifest: Vec::new(),
        })
    }

    pub fn frames_written(&self) -> u32 {
        self.count
    }

    /// Write `manifest.csv` and return the number of frames.
    pub fn finish(self) -> Result<u32> {
        let path = self.dir.join("manifest.csv");
        let mut out = String::from("frame,file,sim_time\n");
        for (idx, file, time) in &self.manifest {
            let _ = writeln!(out, "{idx},{file},{time:.6}");
        }
        fs::write(&path, out).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Ok(self.count)
    }

    fn render(
        &self,
        time: f64,
        grid: &WorldGrid,
        poses: &[SweeperPose],
        sensor: &SensorGeometry,
    ) -> String {
        let he = grid.half_extent;
        let mut svg = String::with_capacity(1 << 16);
        let _ = writeln!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.3} {:.3} {:.3} {:.3}\" width=\"720\" height=\"720\">",
            -he, -he, 2.0 * he, 2.0 * he
        );
        // World y points up; SVG y points down.
        let _ = writeln!(svg, "<g transform=\"scale(1,-1)\">");
        let _ = writeln!(
            svg,
            "<rect x=\"{:.3}\" y=\"{:.3}\" width=\"{:.3}\" height=\"{:.3}\" fill=\"#ffffff\"/>",
            -he,
            -he,
            2.0 * he,
            2.0 * he
        );
        // Cleaned backdrop: the initial region.
        let _ = writeln!(
            svg,
            "<circle cx=\"0\" cy=\"0\" r=\"{:.3}\" fill=\"#b5e6b5\"/>",
            self.r0
        );
        // Contamination as row runs.
        let cs = grid.cell_size;
        for (row, start, end) in grid.contaminated_runs() {
            let x = -he + start as f64 * cs;
            let y = -he + row as f64 * cs;
            let _ = writeln!(
                svg,
                "<rect x=\"{:.3}\" y=\"{:.3}\" width=\"{:.3}\" height=\"{:.3}\" fill=\"#d62718\"/>",
                x,
                y,
                (end - start) as f64 * cs,
                cs
            );
        }
        let _ = writeln!(
            svg,
            "<circle cx=\"0\" cy=\"0\" r=\"{:.3}\" fill=\"none\" stroke=\"#3a3a3a\" stroke-width=\"{:.3}\"/>",
            self.r0,
            he / 400.0
        );
        // Sensor fans and centers.
        for pose in poses {
            let fan = SectorFan::new(pose, sensor);
            let reach = fan.radius();
            let a0 = pose.heading - sensor.alpha;
            let a1 = pose.heading + sensor.alpha;
            let p0 = Point2::new(fan.apex.x + reach * a0.cos(), fan.apex.y + reach * a0.sin());
            let p1 = Point2::new(fan.apex.x + reach * a1.cos(), fan.apex.y + reach * a1.sin());
            let _ = writeln!(
                svg,
                "<path d=\"M {:.3} {:.3} L {:.3} {:.3} A {:.3} {:.3} 0 0 1 {:.3} {:.3} Z\" \
                 fill=\"#1f7a1f\" fill-opacity=\"0.55\" stroke=\"#0c4a0c\" stroke-width=\"{:.3}\"/>",
                fan.apex.x,
                fan.apex.y,
                p0.x,
                p0.y,
                reach,
                reach,
                p1.x,
                p1.y,
                he / 600.0
            );
            let c = pose.position();
            let _ = writeln!(
                svg,
                "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"{:.3}\" fill=\"#1133cc\"/>",
                c.x,
                c.y,
                he / 120.0
            );
        }
        let _ = writeln!(svg, "</g>");
        let _ = writeln!(
            svg,
            "<text x=\"{:.3}\" y=\"{:.3}\" font-family=\"monospace\" font-size=\"{:.3}\" fill=\"#222\">t = {:.3}</text>",
            -he + he / 40.0,
            -he + he / 20.0,
            he / 22.0,
            time
        );
        let _ = writeln!(svg, "</svg>");
        svg
    }
}

impl FrameSink for SvgFrameWriter {
    fn frame(
        &mut self,
        time: f64,
        grid: &WorldGrid,
        poses: &[SweeperPose],
        sensor: &SensorGeometry,
    ) -> Result<()> {
        let name = format!("frame_{:06}.svg", self.count);
        let path = self.dir.join(&name);
        let svg = self.render(time, grid, poses, sensor);
        let mut f =
            fs::File::create(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        f.write_all(svg.as_bytes())
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.manifest.push((self.count, name, time));
        self.count += 1;
        Ok(())
    }
}
