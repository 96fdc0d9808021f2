//! Exact maximum-weight matching on general graphs (blossom algorithm,
//! O(V^3)), plus the minimum-weight perfect matching wrapper the decoder
//! uses. Weights are integers, so the computation is exact; optimality is
//! pinned by a factorial-enumeration oracle in the tests.
//!
//! The solver follows the classic primal-dual formulation: vertex labels
//! S/T/free, trailing endpoints, odd-cycle contraction into blossoms, and
//! dual adjustments by the minimum slack. Index arithmetic mirrors the
//! well-known reference formulation closely, including its use of -1
//! sentinels and negative list indices, to keep the port auditable.

const NEG: i64 = -1;

struct Solver<'a> {
    nvertex: i64,
    edges: &'a [(i64, i64, i64)],
    maxcardinality: bool,
    /// endpoint[p] is the vertex at endpoint p; edge k has endpoints 2k, 2k+1.
    endpoint: Vec<i64>,
    /// neighbend[v]: remote endpoints of edges incident to v.
    neighbend: Vec<Vec<i64>>,
    /// mate[v]: remote endpoint of the matched edge, or -1.
    mate: Vec<i64>,
    /// 0 free, 1 S, 2 T, 5 breadcrumb, -1 recycled. Indexed by vertex and blossom.
    label: Vec<i64>,
    /// Endpoint through which the label was acquired.
    labelend: Vec<i64>,
    /// Top-level blossom containing each vertex.
    inblossom: Vec<i64>,
    blossomparent: Vec<i64>,
    blossomchilds: Vec<Option<Vec<i64>>>,
    blossombase: Vec<i64>,
    blossomendps: Vec<Option<Vec<i64>>>,
    /// Least-slack edge to a different S-blossom, per vertex/blossom.
    bestedge: Vec<i64>,
    blossombestedges: Vec<Option<Vec<i64>>>,
    unusedblossoms: Vec<i64>,
    dualvar: Vec<i64>,
    allowedge: Vec<bool>,
    queue: Vec<i64>,
}

/// Index into a slice with Python-style wrap-around for negative indices.
fn at(v: &[i64], j: i64) -> i64 {
    let n = v.len() as i64;
    v[(((j % n) + n) % n) as usize]
}

impl<'a> Solver<'a> {
    fn new(nvertex: i64, edges: &'a [(i64, i64, i64)], maxcardinality: bool) -> Solver<'a> {
        let nedge = edges.len();
        let maxweight = edges.iter().map(|e| e.2).max().unwrap_or(0).max(0);
        let mut endpoint = Vec::with_capacity(2 * nedge);
        for &(i, j, _) in edges {
            endpoint.push(i);
            endpoint.push(j);
        }
        let mut neighbend = vec![Vec::new(); nvertex as usize];
        for (k, &(i, j, _)) in edges.iter().enumerate() {
            neighbend[i as usize].push(2 * k as i64 + 1);
            neighbend[j as usize].push(2 * k as i64);
        }
        let n = nvertex as usize;
        Solver {
            nvertex,
            edges,
            maxcardinality,
            endpoint,
            neighbend,
            mate: vec![NEG; n],
            label: vec![0; 2 * n],
            labelend: vec![NEG; 2 * n],
            inblossom: (0..nvertex).collect(),
            blossomparent: vec![NEG; 2 * n],
            blossomchilds: vec![None; 2 * n],
            blossombase: (0..nvertex).chain(std::iter::repeat(NEG).take(n)).collect(),
            blossomendps: vec![None; 2 * n],
            bestedge: vec![NEG; 2 * n],
            blossombestedges: vec![None; 2 * n],
            unusedblossoms: (nvertex..2 * nvertex).collect(),
            dualvar: std::iter::repeat(maxweight)
                .take(n)
                .chain(std::iter::repeat(0).take(n))
                .collect(),
            allowedge: vec![false; nedge],
            queue: Vec::new(),
        }
    }

    fn slack(&self, k: i64) -> i64 {
        let (i, j, wt) = self.edges[k as usize];
        self.dualvar[i as usize] + self.dualvar[j as usize] - 2 * wt
    }

    fn blossom_leaves(&self, b: i64, out: &mut Vec<i64>) {
        if b < self.nvertex {
            out.push(b);
        } else {
            for &t in self.blossomchilds[b as usize].as_ref().unwrap() {
                self.blossom_leaves(t, out);
            }
        }
    }

    fn leaves(&self, b: i64) -> Vec<i64> {
        let mut out = Vec::new();
        self.blossom_leaves(b, &mut out);
        out
    }

    fn assign_label(&mut self, w: i64, t: i64, p: i64) {
        let b = self.inblossom[w as usize];
        debug_assert!(self.label[w as usize] == 0 && self.label[b as usize] == 0);
        self.label[w as usize] = t;
        self.label[b as usize] = t;
        self.labelend[w as usize] = p;
        self.labelend[b as usize] = p;
        self.bestedge[w as usize] = NEG;
        self.bestedge[b as usize] = NEG;
        if t == 1 {
            let leaves = self.leaves(b);
            self.queue.extend(leaves);
        } else if t == 2 {
            let base = self.blossombase[b as usize];
            debug_assert!(self.mate[base as usize] >= 0);
            let mb = self.mate[base as usize];
            self.assign_label(self.endpoint[mb as usize], 1, mb ^ 1);
        }
    }

    /// Trace back from the ends of edge (v, w) to find a common ancestor
    /// base vertex, or -1 when the paths reach different exposed roots.
    fn scan_blossom(&mut self, mut v: i64, mut w: i64) -> i64 {
        let mut path = Vec::new();
        let mut base = NEG;
        while v != NEG || w != NEG {
            let mut b = self.inblossom[v as usize];
            if self.label[b as usize] & 4 != 0 {
                base = self.blossombase[b as usize];
                break;
            }
            debug_assert_eq!(self.label[b as usize], 1);
            path.push(b);
            self.label[b as usize] = 5;
            debug_assert_eq!(
                self.labelend[b as usize],
                self.mate[self.blossombase[b as usize] as usize]
            );
            if self.labelend[b as usize] == NEG {
                v = NEG;
            } else {
                v = self.endpoint[self.labelend[b as usize] as usize];
                b = self.inblossom[v as usize];
                debug_assert_eq!(self.label[b as usize], 2);
                debug_assert!(self.labelend[b as usize] >= 0);
                v = self.endpoint[self.labelend[b as usize] as usize];
            }
            if w != NEG {
                std::mem::swap(&mut v, &mut w);
            }
        }
        for b in path {
            self.label[b as usize] = 1;
        }
        base
    }

    /// Contract the odd cycle through edge k and common base into a new
    /// blossom, relabeling its vertices S and merging best-edge lists.
    fn add_blossom(&mut self, base: i64, k: i64) {
        let (mut v, mut w, _) = self.edges[k as usize];
        let bb = self.inblossom[base as usize];
        let mut bv = self.inblossom[v as usize];
        let mut bw = self.inblossom[w as usize];
        let b = self.unusedblossoms.pop().unwrap();
        self.blossombase[b as usize] = base;
        self.blossomparent[b as usize] = NEG;
        self.blossomparent[bb as usize] = b;
        let mut path = Vec::new();
        let mut endps = Vec::new();
        while bv != bb {
            self.blossomparent[bv as usize] = b;
            path.push(bv);
            endps.push(self.labelend[bv as usize]);
            debug_assert!(self.labelend[bv as usize] >= 0);
            v = self.endpoint[self.labelend[bv as usize] as usize];
            bv = self.inblossom[v as usize];
        }
        path.push(bb);
        path.reverse();
        endps.reverse();
        endps.push(2 * k);
        while bw != bb {
            self.blossomparent[bw as usize] = b;
            path.push(bw);
            endps.push(self.labelend[bw as usize] ^ 1);
            debug_assert!(self.labelend[bw as usize] >= 0);
            w = self.endpoint[self.labelend[bw as usize] as usize];
            bw = self.inblossom[w as usize];
        }
        debug_assert_eq!(self.label[bb as usize], 1);
        self.blossomchilds[b as usize] = Some(path.clone());
        self.blossomendps[b as usize] = Some(endps);
        self.label[b as usize] = 1;
        self.labelend[b as usize] = self.labelend[bb as usize];
        self.dualvar[b as usize] = 0;
        for v in self.leaves(b) {
            if self.label[self.inblossom[v as usize] as usize] == 2 {
                self.queue.push(v);
            }
            self.inblossom[v as usize] = b;
        }
        // Merge least-slack edges of the sub-blossoms.
        let mut bestedgeto = vec![NEG; 2 * self.nvertex as usize];
        for &bv in &path {
            let nblists: Vec<Vec<i64>> =
                if let Some(lst) = self.blossombestedges[bv as usize].clone() {
                    vec![lst]
                } else {
                    self.leaves(bv)
                        .iter()
                        .map(|&v| {
                            self.neighbend[v as usize].iter().map(|&p| p / 2).collect()
                        })
                        .collect()
                };
            for nblist in nblists {
                for k in nblist {
                    let (mut i, mut j, _) = self.edges[k as usize];
                    if self.inblossom[j as usize] == b {
                        std::mem::swap(&mut i, &mut j);
                    }
                    let bj = self.inblossom[j as usize];
                    if bj != b
                        && self.label[bj as usize] == 1
                        && (bestedgeto[bj as usize] == NEG
                            || self.slack(k) < self.slack(bestedgeto[bj as usize]))
                    {
                        bestedgeto[bj as usize] = k;
                    }
                }
            }
            self.blossombestedges[bv as usize] = None;
            self.bestedge[bv as usize] = NEG;
        }
        let merged: Vec<i64> = bestedgeto.into_iter().filter(|&k| k != NEG).collect();
        self.bestedge[b as usize] = NEG;
        for &k in &merged {
            if self.bestedge[b as usize] == NEG
                || self.slack(k) < self.slack(self.bestedge[b as usize])
            {
                self.bestedge[b as usize] = k;
            }
        }
        self.blossombestedges[b as usize] = Some(merged);
    }

    /// Expand blossom b, promoting its children to top level. During a
    /// stage (endstage false) a T-blossom's children are relabeled along
    /// the path from the entry child to the base.
    fn expand_blossom(&mut self, b: i64, endstage: bool) {
        let childs = self.blossomchilds[b as usize].clone().unwrap();
        for &s in &childs {
            self.blossomparent[s as usize] = NEG;
            if s < self.nvertex {
                self.inblossom[s as usize] = s;
            } else if endstage && self.dualvar[s as usize] == 0 {
                self.expand_blossom(s, endstage);
            } else {
                for v in self.leaves(s) {
                    self.inblossom[v as usize] = s;
                }
            }
        }
        if !endstage && self.label[b as usize] == 2 {
            debug_assert!(self.labelend[b as usize] >= 0);
            let entrychild = self.inblossom
                [self.endpoint[(self.labelend[b as usize] ^ 1) as usize] as usize];
            let endps = self.blossomendps[b as usize].clone().unwrap();
            let mut j = childs.iter().position(|&c| c == entrychild).unwrap() as i64;
            let (jstep, endptrick): (i64, i64) = if j & 1 != 0 {
                j -= childs.len() as i64;
                (1, 0)
            } else {
                (-1, 1)
            };
            let mut p = self.labelend[b as usize];
            while j != 0 {
                self.label[self.endpoint[(p ^ 1) as usize] as usize] = 0;
                let q = at(&endps, j - endptrick) ^ endptrick ^ 1;
                self.label[self.endpoint[q as usize] as usize] = 0;
                self.assign_label(self.endpoint[(p ^ 1) as usize], 2, p);
                self.allowedge[(at(&endps, j - endptrick) / 2) as usize] = true;
                j += jstep;
                p = at(&endps, j - endptrick) ^ endptrick;
                self.allowedge[(p / 2) as usize] = true;
                j += jstep;
            }
            // Relabel the base child T without stepping through to its mate.
            let bv = at(&childs, j);
            self.label[self.endpoint[(p ^ 1) as usize] as usize] = 2;
            self.label[bv as usize] = 2;
            self.labelend[self.endpoint[(p ^ 1) as usize] as usize] = p;
            self.labelend[bv as usize] = p;
            self.bestedge[bv as usize] = NEG;
            j += jstep;
            while at(&childs, j) != entrychild {
                let bv = at(&childs, j);
                if self.label[bv as usize] == 1 {
                    j += jstep;
                    continue;
                }
                let labeled = self
                    .leaves(bv)
                    .into_iter()
                    .find(|&v| self.label[v as usize] != 0);
                if let Some(v) = labeled {
                    debug_assert_eq!(self.label[v as usize], 2);
                    debug_assert_eq!(self.inblossom[v as usize], bv);
                    self.label[v as usize] = 0;
                    let base = self.blossombase[bv as usize];
                    self.label[self.endpoint[self.mate[base as usize] as usize] as usize] = 0;
                    let le = self.labelend[v as usize];
                    self.assign_label(v, 2, le);
                }
                j += jstep;
            }
        }
        self.label[b as usize] = NEG;
        self.labelend[b as usize] = NEG;
        self.blossomchilds[b as usize] = None;
        self.blossomendps[b as usize] = None;
        self.blossombase[b as usize] = NEG;
        self.blossombestedges[b as usize] = None;
        self.bestedge[b as usize] = NEG;
        self.unusedblossoms.push(b);
    }

    /// Swap matched and unmatched edges along the path within blossom b
    /// from its base to vertex v, making v the new base.
    fn augment_blossom(&mut self, b: i64, v: i64) {
        let mut t = v;
        while self.blossomparent[t as usize] != b {
            t = self.blossomparent[t as usize];
        }
        if t >= self.nvertex {
            self.augment_blossom(t, v);
        }
        let childs = self.blossomchilds[b as usize].clone().unwrap();
        let endps = self.blossomendps[b as usize].clone().unwrap();
        let i = childs.iter().position(|&c| c == t).unwrap() as i64;
        let mut j = i;
        let (jstep, endptrick): (i64, i64) = if i & 1 != 0 {
            j -= childs.len() as i64;
            (1, 0)
        } else {
            (-1, 1)
        };
        while j != 0 {
            j += jstep;
            let t = at(&childs, j);
            let p = at(&endps, j - endptrick) ^ endptrick;
            if t >= self.nvertex {
                self.augment_blossom(t, self.endpoint[p as usize]);
            }
            j += jstep;
            let t = at(&childs, j);
            if t >= self.nvertex {
                self.augment_blossom(t, self.endpoint[(p ^ 1) as usize]);
            }
            self.mate[self.endpoint[p as usize] as usize] = p ^ 1;
            self.mate[self.endpoint[(p ^ 1) as usize] as usize] = p;
        }
        let rot = |v: &[i64], i: i64| -> Vec<i64> {
            let i = i as usize;
            let mut out = v[i..].to_vec();
            out.extend_from_slice(&v[..i]);
            out
        };
        self.blossomchilds[b as usize] = Some(rot(&childs, i));
        self.blossomendps[b as usize] = Some(rot(&endps, i));
        self.blossombase[b as usize] =
            self.blossombase[self.blossomchilds[b as usize].as_ref().unwrap()[0] as usize];
        debug_assert_eq!(self.blossombase[b as usize], v);
    }

    /// Augment the matching along the alternating trees through edge k.
    fn augment_matching(&mut self, k: i64) {
        let (v, w, _) = self.edges[k as usize];
        for (mut s, mut p) in [(v, 2 * k + 1), (w, 2 * k)] {
            loop {
                let bs = self.inblossom[s as usize];
                debug_assert_eq!(self.label[bs as usize], 1);
                debug_assert_eq!(
                    self.labelend[bs as usize],
                    self.mate[self.blossombase[bs as usize] as usize]
                );
                if bs >= self.nvertex {
                    self.augment_blossom(bs, s);
                }
                self.mate[s as usize] = p;
                if self.labelend[bs as usize] == NEG {
                    break;
                }
                let t = self.endpoint[self.labelend[bs as usize] as usize];
                let bt = self.inblossom[t as usize];
                debug_assert_eq!(self.label[bt as usize], 2);
                debug_assert!(self.labelend[bt as usize] >= 0);
                s = self.endpoint[self.labelend[bt as usize] as usize];
                let j = self.endpoint[(self.labelend[bt as usize] ^ 1) as usize];
                debug_assert_eq!(self.blossombase[bt as usize], t);
                if bt >= self.nvertex {
                    self.augment_blossom(bt, j);
                }
                self.mate[j as usize] = self.labelend[bt as usize];
                p = self.labelend[bt as usize] ^ 1;
            }
        }
    }

    fn solve(&mut self) -> Vec<i64> {
        let nvertex = self.nvertex;
        let nedge = self.edges.len();
        for _ in 0..nvertex {
            // New stage: clear labels, best edges, allowed edges.
            for x in self.label.iter_mut() {
                *x = 0;
            }
            for x in self.bestedge.iter_mut() {
                *x = NEG;
            }
            for k in nvertex as usize..2 * nvertex as usize {
                self.blossombestedges[k] = None;
            }
            for x in self.allowedge.iter_mut() {
                *x = false;
            }
            self.queue.clear();
            for v in 0..nvertex {
                if self.mate[v as usize] == NEG
                    && self.label[self.inblossom[v as usize] as usize] == 0
                {
                    self.assign_label(v, 1, NEG);
                }
            }
            let mut augmented = false;
            loop {
                // Scan S-vertices, growing trees, forming blossoms, or
                // augmenting when two trees meet.
                while let Some(v) = if augmented { None } else { self.queue.pop() } {
                    debug_assert_eq!(self.label[self.inblossom[v as usize] as usize], 1);
                    let nb = self.neighbend[v as usize].clone();
                    for p in nb {
                        let k = p / 2;
                        let w = self.endpoint[p as usize];
                        if self.inblossom[v as usize] == self.inblossom[w as usize] {
                            continue;
                        }
                        let mut kslack = 0;
                        if !self.allowedge[k as usize] {
                            kslack = self.slack(k);
                            if kslack <= 0 {
                                self.allowedge[k as usize] = true;
                            }
                        }
                        if self.allowedge[k as usize] {
                            if self.label[self.inblossom[w as usize] as usize] == 0 {
                                self.assign_label(w, 2, p ^ 1);
                            } else if self.label[self.inblossom[w as usize] as usize] == 1 {
                                let base = self.scan_blossom(v, w);
                                if base >= 0 {
                                    self.add_blossom(base, k);
                                } else {
                                    self.augment_matching(k);
                                    augmented = true;
                                    break;
                                }
                            } else if self.label[w as usize] == 0 {
                                debug_assert_eq!(
                                    self.label[self.inblossom[w as usize] as usize],
                                    2
                                );
                                self.label[w as usize] = 2;
                                self.labelend[w as usize] = p ^ 1;
                            }
                        } else if self.label[self.inblossom[w as usize] as usize] == 1 {
                            let b = self.inblossom[v as usize];
                            if self.bestedge[b as usize] == NEG
                                || kslack < self.slack(self.bestedge[b as usize])
                            {
                                self.bestedge[b as usize] = k;
                            }
                        } else if self.label[w as usize] == 0
                            && (self.bestedge[w as usize] == NEG
                                || kslack < self.slack(self.bestedge[w as usize]))
                        {
                            self.bestedge[w as usize] = k;
                        }
                    }
                }
                if augmented {
                    break;
                }
                // Dual update: choose the smallest delta over the four types.
                let mut deltatype = -1;
                let mut delta = 0;
                let mut deltaedge = NEG;
                let mut deltablossom = NEG;
                if !self.maxcardinality {
                    deltatype = 1;
                    delta = (0..nvertex as usize)
                        .map(|v| self.dualvar[v])
                        .min()
                        .unwrap_or(0);
                }
                for v in 0..nvertex as usize {
                    if self.label[self.inblossom[v] as usize] == 0 && self.bestedge[v] != NEG {
                        let d = self.slack(self.bestedge[v]);
                        if deltatype == -1 || d < delta {
                            delta = d;
                            deltatype = 2;
                            deltaedge = self.bestedge[v];
                        }
                    }
                }
                for b in 0..2 * nvertex as usize {
                    if self.blossomparent[b] == NEG
                        && self.label[b] == 1
                        && self.bestedge[b] != NEG
                    {
                        let kslack = self.slack(self.bestedge[b]);
                        // S-to-S slacks stay even with integer weights.
                        debug_assert_eq!(kslack % 2, 0);
                        let d = kslack / 2;
                        if deltatype == -1 || d < delta {
                            delta = d;
                            deltatype = 3;
                            deltaedge = self.bestedge[b];
                        }
                    }
                }
                for b in nvertex as usize..2 * nvertex as usize {
                    if self.blossombase[b] >= 0
                        && self.blossomparent[b] == NEG
                        && self.label[b] == 2
                        && (deltatype == -1 || self.dualvar[b] < delta)
                    {
                        delta = self.dualvar[b];
                        deltatype = 4;
                        deltablossom = b as i64;
                    }
                }
                if deltatype == -1 {
                    // No further progress possible under max cardinality.
                    deltatype = 1;
                    delta = (0..nvertex as usize)
                        .map(|v| self.dualvar[v])
                        .min()
                        .unwrap_or(0)
                        .max(0);
                }
                for v in 0..nvertex as usize {
                    match self.label[self.inblossom[v] as usize] {
                        1 => self.dualvar[v] -= delta,
                        2 => self.dualvar[v] += delta,
                        _ => {}
                    }
                }
                for b in nvertex as usize..2 * nvertex as usize {
                    if self.blossombase[b] >= 0 && self.blossomparent[b] == NEG {
                        match self.label[b] {
                            1 => self.dualvar[b] += delta,
                            2 => self.dualvar[b] -= delta,
                            _ => {}
                        }
                    }
                }
                match deltatype {
                    1 => break,
                    2 => {
                        self.allowedge[deltaedge as usize] = true;
                        let (mut i, j, _) = self.edges[deltaedge as usize];
                        if self.label[self.inblossom[i as usize] as usize] == 0 {
                            i = j;
                        }
                        debug_assert_eq!(self.label[self.inblossom[i as usize] as usize], 1);
                        self.queue.push(i);
                    }
                    3 => {
                        self.allowedge[deltaedge as usize] = true;
                        let (i, _, _) = self.edges[deltaedge as usize];
                        debug_assert_eq!(self.label[self.inblossom[i as usize] as usize], 1);
                        self.queue.push(i);
                    }
                    _ => {
                        self.expand_blossom(deltablossom, false);
                    }
                }
            }
            if !augmented {
                break;
            }
            // End of stage: expand all S-blossoms with zero dual.
            for b in nvertex..2 * nvertex {
                if self.blossomparent[b as usize] == NEG
                    && self.blossombase[b as usize] >= 0
                    && self.label[b as usize] == 1
                    && self.dualvar[b as usize] == 0
                {
                    self.expand_blossom(b, true);
                }
            }
            let _ = nedge;
        }
        let mut mate = self.mate.clone();
        for v in 0..nvertex as usize {
            if mate[v] >= 0 {
                mate[v] = self.endpoint[mate[v] as usize];
            }
        }
        mate
    }
}

/// Maximum-weight matching. `mate[v]` gives v's partner, or None when v is
/// unmatched. With `max_cardinality`, the matching has maximum size and,
/// among those, maximum weight.
pub fn max_weight_matching(
    n_vertices: usize,
    edges: &[(usize, usize, i64)],
    max_cardinality: bool,
) -> Vec<Option<usize>> {
    if edges.is_empty() {
        return vec![None; n_vertices];
    }
    let edges_i: Vec<(i64, i64, i64)> = edges
        .iter()
        .map(|&(i, j, w)| {
            assert!(i != j && i < n_vertices && j < n_vertices);
            (i as i64, j as i64, w)
        })
        .collect();
    let mut solver = Solver::new(n_vertices as i64, &edges_i, max_cardinality);
    solver
        .solve()
        .into_iter()
        .map(|m| if m >= 0 { Some(m as usize) } else { None })
        .collect()
}

/// Minimum-weight perfect matching for non-negative integer weights, via
/// the transform w -> 2 (w_max + 1 - w) and a maximum-cardinality run: all
/// perfect matchings share the edge count, so the maximizer of the
/// transformed weight minimizes the original. Returns None when the graph
/// has no perfect matching.
pub fn min_weight_perfect_matching(
    n_vertices: usize,
    edges: &[(usize, usize, i64)],
) -> Option<Vec<usize>> {
    if n_vertices == 0 {
        return Some(Vec::new());
    }
    if n_vertices % 2 != 0 {
        return None;
    }
    let w_max = edges.iter().map(|e| e.2).max().unwrap_or(0);
    assert!(edges.iter().all(|e| e.2 >= 0), "weights must be non-negative");
    let transformed: Vec<(usize, usize, i64)> = edges
        .iter()
        .map(|&(i, j, w)| (i, j, 2 * (w_max + 1 - w)))
        .collect();
    let mate = max_weight_matching(n_vertices, &transformed, true);
    let mut out = Vec::with_capacity(n_vertices);
    for m in mate {
        out.push(m?);
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use std::collections::HashMap;

    /// Factorial enumeration of all perfect matchings; the optimality oracle.
    fn brute_force_min_perfect(n: usize, edges: &[(usize, usize, i64)]) -> Option<i64> {
        let mut adj = HashMap::new();
        for &(i, j, w) in edges {
            let key = (i.min(j), i.max(j));
            let e = adj.entry(key).or_insert(w);
            if w < *e {
                *e = w;
            }
        }
        fn recurse(
            used: &mut Vec<bool>,
            adj: &HashMap<(usize, usize), i64>,
            n: usize,
        ) -> Option<i64> {
            let Some(first) = (0..n).find(|&v| !used[v]) else {
                return Some(0);
            };
            used[first] = true;
            let mut best = None;
            for other in first + 1..n {
                if used[other] {
                    continue;
                }
                let Some(&w) = adj.get(&(first, other)) else {
                    continue;
                };
                used[other] = true;
                if let Some(rest) = recurse(used, adj, n) {
                    let total = w + rest;
                    if best.is_none_or(|b| total < b) {
                        best = Some(total);
                    }
                }
                used[other] = false;
            }
            used[first] = false;
            best
        }
        recurse(&mut vec![false; n], &adj, n)
    }

    fn matching_weight(n: usize, edges: &[(usize, usize, i64)], mate: &[usize]) -> i64 {
        let mut adj = HashMap::new();
        for &(i, j, w) in edges {
            let key = (i.min(j), i.max(j));
            let e = adj.entry(key).or_insert(w);
            if w < *e {
                *e = w;
            }
        }
        let mut total = 0;
        for v in 0..n {
            let m = mate[v];
            assert_eq!(mate[m], v, "matching must be symmetric");
            if v < m {
                total += adj[&(v, m)];
            }
        }
        total
    }

    #[test]
    fn trivial_graphs() {
        assert_eq!(max_weight_matching(0, &[], false), Vec::<Option<usize>>::new());
        assert_eq!(max_weight_matching(2, &[(0, 1, 5)], false), vec![Some(1), Some(0)]);
        // Negative-value edge is skipped unless cardinality forces it.
        assert_eq!(
            max_weight_matching(2, &[(0, 1, -2)], false),
            vec![None, None]
        );
        assert_eq!(
            max_weight_matching(2, &[(0, 1, -2)], true),
            vec![Some(1), Some(0)]
        );
    }

    #[test]
    fn prefers_heavy_edge_over_two_light() {
        // Path 0-1-2-3: picking the middle edge alone loses to the two ends.
        let edges = [(0, 1, 5), (1, 2, 11), (2, 3, 5)];
        assert_eq!(
            max_weight_matching(4, &edges, false),
            vec![None, Some(2), Some(1), None]
        );
        assert_eq!(
            max_weight_matching(4, &edges, true),
            vec![Some(1), Some(0), Some(3), Some(2)]
        );
    }

    #[test]
    fn creates_and_uses_blossom() {
        // Classic blossom case: triangle with a pendant vertex.
        let edges = [(0, 1, 6), (0, 2, 10), (1, 2, 6), (2, 3, 12)];
        let mate = max_weight_matching(4, &edges, false);
        assert_eq!(mate, vec![Some(1), Some(0), Some(3), Some(2)]);
    }

    #[test]
    fn nested_blossom_expansion() {
        // Nested S-blossom expanded during augmenting (reference regression).
        let edges = [
            (1, 2, 9),
            (1, 3, 9),
            (2, 3, 10),
            (2, 4, 8),
            (3, 5, 8),
            (4, 5, 10),
            (5, 6, 6),
        ];
        let edges0: Vec<(usize, usize, i64)> =
            edges.iter().map(|&(i, j, w)| (i - 1, j - 1, w)).collect();
        let mate = max_weight_matching(6, &edges0, false);
        assert_eq!(
            mate,
            vec![Some(2), Some(3), Some(0), Some(1), Some(5), Some(4)]
        );
    }

    #[test]
    fn blossom_with_relabeling_regression() {
        // S-blossom relabeled as T-blossom during the dual update.
        let edges = [
            (1, 2, 10),
            (1, 7, 10),
            (2, 3, 12),
            (3, 4, 20),
            (3, 5, 20),
            (4, 5, 25),
            (5, 6, 10),
            (6, 7, 10),
            (7, 8, 8),
        ];
        let edges0: Vec<(usize, usize, i64)> =
            edges.iter().map(|&(i, j, w)| (i - 1, j - 1, w)).collect();
        let mate = max_weight_matching(8, &edges0, false);
        assert_eq!(
            mate,
            vec![
                Some(1),
                Some(0),
                Some(3),
                Some(2),
                Some(5),
                Some(4),
                Some(7),
                Some(6)
            ]
        );
    }

    #[test]
    fn min_perfect_matching_two_node_cases() {
        // Two real nodes r0, r1 with partners b0, b1: real-real weight 3
        // beats boundary weights 2 + 4.
        let edges = [(0, 1, 3), (0, 2, 2), (1, 3, 4), (2, 3, 0)];
        let mate = min_weight_perfect_matching(4, &edges).unwrap();
        assert_eq!(mate, vec![1, 0, 3, 2]);
        // Real-real weight 7 loses to the boundaries.
        let edges = [(0, 1, 7), (0, 2, 2), (1, 3, 4), (2, 3, 0)];
        let mate = min_weight_perfect_matching(4, &edges).unwrap();
        assert_eq!(mate, vec![2, 3, 0, 1]);
    }

    #[test]
    fn no_perfect_matching_detected() {
        // A star on 4 vertices has no perfect matching.
        let edges = [(0, 1, 1), (0, 2, 1), (0, 3, 1)];
        assert_eq!(min_weight_perfect_matching(4, &edges), None);
        assert_eq!(min_weight_perfect_matching(3, &[(0, 1, 1)]), None);
    }

    #[test]
    fn matches_brute_force_on_random_graphs() {
        let mut rng = ChaCha12Rng::seed_from_u64(0x1a2b3c);
        let mut checked = 0;
        while checked < 500 {
            let n = 2 * rng.random_range(1..=6usize);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.random::<f64>() < 0.6 {
                        edges.push((i, j, rng.random_range(0..=20i64)));
                    }
                }
            }
            let oracle = brute_force_min_perfect(n, &edges);
            let solved = min_weight_perfect_matching(n, &edges);
            match (oracle, solved) {
                (None, None) => {}
                (Some(best), Some(mate)) => {
                    assert_eq!(matching_weight(n, &edges, &mate), best);
                }
                (o, s) => panic!("oracle {:?} vs solver {:?}", o, s.map(|m| m.len())),
            }
            if oracle.is_some() {
                checked += 1;
            }
        }
    }
}
