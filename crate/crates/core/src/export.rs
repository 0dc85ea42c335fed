//! Text serializations of every artifact. Output depends only on the input
//! values: canonical ordering, shortest round-trip float formatting, no
//! timestamps. Column layouts are documented in `docs/formats.md`.

use std::fmt::Write;

use serde::Serialize;

use crate::clusters::{ClusterSummary, NStar, TriadGraph};
use crate::direct::AveragingTable;
use crate::dynamics::EnsembleStats;
use crate::lattice::{Triad, WaveVector};

pub const TRIAD_HEADER: &str = "k1x,k1y,k2x,k2y,k3x,k3y";

pub fn triads_csv(triads: &[Triad]) -> String {
    let mut s = String::from(TRIAD_HEADER);
    s.push('\n');
    for t in triads {
        let _ = writeln!(s, "{},{},{},{},{},{}", t.k1.x, t.k1.y, t.k2.x, t.k2.y, t.k3.x, t.k3.y);
    }
    s
}

#[derive(Serialize)]
struct Listing<'a> {
    count: usize,
    triads: &'a [Triad],
}

pub fn triads_json(triads: &[Triad]) -> String {
    to_json(&Listing { count: triads.len(), triads })
}

/// Parses the CSV written by [`triads_csv`].
pub fn parse_triads_csv(text: &str) -> Option<Vec<Triad>> {
    let mut lines = text.lines();
    if lines.next()? != TRIAD_HEADER {
        return None;
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let c: Vec<i32> = l.split(',').map(|x| x.parse().ok()).collect::<Option<_>>()?;
            if c.len() != 6 {
                return None;
            }
            Some(Triad::new(WaveVector::new(c[0], c[1]), WaveVector::new(c[2], c[3]), WaveVector::new(c[4], c[5])))
        })
        .collect()
}

/// One line per shared vector: `node_i node_j sharedX sharedY ROLE1ROLE2`.
pub fn edge_list(graph: &TriadGraph) -> String {
    let mut s = String::new();
    for e in &graph.edges {
        let _ = writeln!(s, "{} {} {} {} {}{}", e.a, e.b, e.shared.x, e.shared.y, e.role_a, e.role_b);
    }
    s
}

pub fn nodes_csv(graph: &TriadGraph) -> String {
    let mut s = format!("node,{TRIAD_HEADER},component\n");
    let comp = graph.component_of();
    for (i, t) in graph.nodes.iter().enumerate() {
        let _ = writeln!(s, "{i},{},{},{},{},{},{},{}", t.k1.x, t.k1.y, t.k2.x, t.k2.y, t.k3.x, t.k3.y, comp[i]);
    }
    s
}

pub fn stars_csv(stars: &[NStar]) -> String {
    let mut s = String::from("centerX,centerY,N\n");
    for st in stars {
        let _ = writeln!(s, "{},{},{}", st.center.x, st.center.y, st.n());
    }
    s
}

pub fn components_csv(summary: &ClusterSummary) -> String {
    let mut s = String::from("component,triads,vectors,pp,ap,aa\n");
    for c in &summary.components {
        let _ = writeln!(s, "{},{},{},{},{},{}", c.index, c.triads, c.vectors, c.edges.pp, c.edges.ap, c.edges.aa);
    }
    s
}

#[derive(Serialize)]
struct ClusterReport<'a> {
    graph: &'a TriadGraph,
    stars: Vec<StarEntry>,
    summary: &'a ClusterSummary,
}

#[derive(Serialize)]
struct StarEntry {
    center: WaveVector,
    n: usize,
    members: Vec<Triad>,
}

pub fn clusters_json(graph: &TriadGraph, stars: &[NStar], summary: &ClusterSummary) -> String {
    let stars = stars.iter().map(|s| StarEntry { center: s.center, n: s.n(), members: s.members.clone() }).collect();
    to_json(&ClusterReport { graph, stars, summary })
}

pub fn timeseries_csv(stats: &EnsembleStats) -> String {
    let mut s = String::from("tau,mode,mean_re,mean_im,mean_abs2,var_abs2\n");
    for (r, tau) in stats.taus.iter().enumerate() {
        for m in 0..stats.modes.len() {
            let z = stats.mean[r][m];
            let _ = writeln!(s, "{tau},{m},{},{},{},{}", z.re, z.im, stats.mean_abs2[r][m], stats.var_abs2[r][m]);
        }
    }
    s
}

pub fn modes_csv(modes: &[WaveVector]) -> String {
    let mut s = String::from("mode,kx,ky,norm2\n");
    for (m, k) in modes.iter().enumerate() {
        let _ = writeln!(s, "{m},{},{},{}", k.x, k.y, k.norm2());
    }
    s
}

pub fn spectrum_csv(stats: &EnsembleStats) -> String {
    let mut s = String::from("mode,kx,ky,mean_abs2\n");
    for (m, (k, e)) in stats.modes.iter().zip(stats.spectrum()).enumerate() {
        let _ = writeln!(s, "{m},{},{},{e}", k.x, k.y);
    }
    s
}

/// Tidy long format: one observation per line.
pub fn timeseries_plot_data(stats: &EnsembleStats) -> String {
    let mut s = String::from("tau,kx,ky,quantity,value\n");
    for (r, tau) in stats.taus.iter().enumerate() {
        for (m, k) in stats.modes.iter().enumerate() {
            let z = stats.mean[r][m];
            for (q, val) in [
                ("mean_re", z.re),
                ("mean_im", z.im),
                ("mean_abs2", stats.mean_abs2[r][m]),
                ("var_abs2", stats.var_abs2[r][m]),
            ] {
                let _ = writeln!(s, "{tau},{},{},{q},{val}", k.x, k.y);
            }
        }
    }
    s
}

pub fn averaging_csv(table: &AveragingTable) -> String {
    let mut s = String::from("nu,max_dev,l2_dev,paths,h_fast\n");
    for r in &table.rows {
        let _ = writeln!(s, "{},{},{},{},{}", r.nu, r.max_dev, r.l2_dev, r.paths, r.h_fast);
    }
    s
}

pub fn averaging_plot_data(table: &AveragingTable) -> String {
    let mut s = String::from("nu,kx,ky,direct_abs2,effective_abs2,deviation\n");
    for r in &table.rows {
        for (m, k) in table.modes.iter().enumerate() {
            let (d, e) = (r.direct_abs2[m], r.effective_abs2[m]);
            let _ = writeln!(s, "{},{},{},{d},{e},{}", r.nu, k.x, k.y, (d - e).abs());
        }
    }
    s
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("in-memory serialization");
    s.push('\n');
    s
}
