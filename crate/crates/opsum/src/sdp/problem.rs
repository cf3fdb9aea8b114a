//! Block-structured Hermitian SDP description and its lowering to the real
//! symmetric cone form consumed by the interior-point core.
//!
//! A problem has complex Hermitian PSD variable blocks, real free scalars,
//! real-linear equality rows `Σ_l ⟨C_l, X_l⟩ + Σ_j w_j f_j = rhs`, and an
//! optional linear objective. Complex Hermitian blocks are lowered through
//! the real embedding `X ↦ [[Re X, −Im X],[Im X, Re X]]`; the inverse map
//! averages over the embedding symmetry, so the lowered program is exactly
//! equivalent and no extra structure rows are needed.

use crate::linalg::{
    self, embed_herm, herm_basis, herm_dim, smat, svec, svec_len, unembed_sym, CMat, RMat, RVec,
};
use crate::sdp::solver::ConeProgram;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("malformed problem: {0}")]
    Malformed(String),
    #[error("solver returned no usable answer: {0}")]
    Indeterminate(String),
    #[error("serialization: {0}")]
    Serialization(String),
}

/// One equality row `Σ_l ⟨C_l, X_l⟩ + Σ_j w_j f_j = rhs`.
#[derive(Debug, Clone)]
pub struct SdpRow {
    pub cone: Vec<(usize, CMat)>,
    pub free: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// Linear objective `Σ_l ⟨C_l, X_l⟩ + Σ_j w_j f_j + constant`, minimized.
#[derive(Debug, Clone, Default)]
pub struct SdpObjective {
    pub cone: Vec<(usize, CMat)>,
    pub free: Vec<(usize, f64)>,
    pub constant: f64,
}

/// Handle to a Hermitian PSD variable block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockId(pub usize);

/// Handle to a contiguous run of free scalars encoding a Hermitian matrix in
/// the orthonormal coordinate basis.
#[derive(Debug, Clone, Copy)]
pub struct HermVar {
    pub start: usize,
    pub n: usize,
}

/// Affine Hermitian-valued expression in the free scalars.
#[derive(Debug, Clone)]
pub struct HermExpr {
    pub n: usize,
    pub constant: CMat,
    pub terms: Vec<(usize, CMat)>,
}

impl HermExpr {
    pub fn constant(c: CMat) -> Self {
        let n = c.nrows();
        HermExpr {
            n,
            constant: c,
            terms: Vec::new(),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self::constant(CMat::zeros(n, n))
    }

    /// The expression whose value is the Hermitian matrix held by `var`.
    pub fn var(var: HermVar) -> Self {
        let terms = (0..herm_dim(var.n))
            .map(|p| (var.start + p, herm_basis(var.n, p)))
            .collect();
        HermExpr {
            n: var.n,
            constant: CMat::zeros(var.n, var.n),
            terms,
        }
    }

    /// A single free scalar times a fixed Hermitian coefficient.
    pub fn scalar_times(idx: usize, coeff: CMat) -> Self {
        let n = coeff.nrows();
        HermExpr {
            n,
            constant: CMat::zeros(n, n),
            terms: vec![(idx, coeff)],
        }
    }

    pub fn add(mut self, other: &HermExpr) -> Self {
        assert_eq!(self.n, other.n);
        self.constant += &other.constant;
        self.terms.extend(other.terms.iter().cloned());
        self
    }

    pub fn sub(self, other: &HermExpr) -> Self {
        self.add(&other.clone().scale(-1.0))
    }

    pub fn scale(mut self, t: f64) -> Self {
        self.constant.scale_mut(t);
        for (_, c) in &mut self.terms {
            c.scale_mut(t);
        }
        self
    }

    /// Applies a linear matrix map to the constant and every coefficient.
    pub fn map<F: Fn(&CMat) -> CMat>(&self, f: F) -> Self {
        let constant = f(&self.constant);
        let n = constant.nrows();
        HermExpr {
            n,
            constant,
            terms: self.terms.iter().map(|(j, c)| (*j, f(c))).collect(),
        }
    }
}

/// Block-structured Hermitian semidefinite feasibility/minimization problem.
#[derive(Debug, Clone, Default)]
pub struct SdpProblem {
    pub(crate) herm_blocks: Vec<usize>,
    pub(crate) n_free: usize,
    pub(crate) rows: Vec<SdpRow>,
    pub(crate) objective: Option<SdpObjective>,
}

impl SdpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a Hermitian PSD variable block of complex dimension `n`.
    pub fn psd_block(&mut self, n: usize) -> BlockId {
        self.herm_blocks.push(n);
        BlockId(self.herm_blocks.len() - 1)
    }

    pub fn free_scalar(&mut self) -> usize {
        self.n_free += 1;
        self.n_free - 1
    }

    /// Declares a free Hermitian matrix variable as `n²` free scalars.
    pub fn free_herm(&mut self, n: usize) -> HermVar {
        let start = self.n_free;
        self.n_free += herm_dim(n);
        HermVar { start, n }
    }

    pub fn add_row(&mut self, cone: Vec<(usize, CMat)>, free: Vec<(usize, f64)>, rhs: f64) {
        self.rows.push(SdpRow { cone, free, rhs });
    }

    /// Constrains an affine Hermitian expression in the free scalars to be
    /// PSD by introducing a slack block tied coordinate-wise to the
    /// expression. Returns the slack block (whose dual is the constraint's
    /// multiplier).
    pub fn psd_constraint(&mut self, expr: &HermExpr) -> BlockId {
        let blk = self.psd_block(expr.n);
        for q in 0..herm_dim(expr.n) {
            let hq = herm_basis(expr.n, q);
            let mut free = Vec::with_capacity(expr.terms.len());
            for (j, c) in &expr.terms {
                let w = linalg::frob_inner(&hq, c).re;
                if w.abs() > 0.0 {
                    free.push((*j, -w));
                }
            }
            let rhs = linalg::frob_inner(&hq, &expr.constant).re;
            self.add_row(vec![(blk.0, hq)], free, rhs);
        }
        blk
    }

    /// Pins every coordinate of a PSD block to a target Hermitian matrix
    /// plus an affine correction in the free scalars.
    pub fn pin_block(&mut self, blk: BlockId, target: &CMat) {
        let n = self.herm_blocks[blk.0];
        assert_eq!(target.nrows(), n);
        for q in 0..herm_dim(n) {
            let hq = herm_basis(n, q);
            let rhs = linalg::frob_inner(&hq, target).re;
            self.add_row(vec![(blk.0, hq)], Vec::new(), rhs);
        }
    }

    pub fn minimize(&mut self, objective: SdpObjective) {
        self.objective = Some(objective);
    }

    pub fn minimize_free(&mut self, terms: Vec<(usize, f64)>, constant: f64) {
        self.objective = Some(SdpObjective {
            cone: Vec::new(),
            free: terms,
            constant,
        });
    }

    pub fn num_blocks(&self) -> usize {
        self.herm_blocks.len()
    }

    pub fn block_dim(&self, blk: BlockId) -> usize {
        self.herm_blocks[blk.0]
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn validate(&self) -> Result<(), SdpError> {
        for (r, row) in self.rows.iter().enumerate() {
            for (l, c) in &row.cone {
                let n = *self
                    .herm_blocks
                    .get(*l)
                    .ok_or_else(|| SdpError::Malformed(format!("row {r}: block {l} undeclared")))?;
                if c.nrows() != n || c.ncols() != n {
                    return Err(SdpError::Malformed(format!(
                        "row {r}: coefficient for block {l} must be {n}x{n}"
                    )));
                }
                if linalg::herm_deviation(c) > 1e-9 {
                    return Err(SdpError::Malformed(format!(
                        "row {r}: coefficient for block {l} is not Hermitian"
                    )));
                }
                if !c.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                    return Err(SdpError::Malformed(format!("row {r}: non-finite coefficient")));
                }
            }
            for (j, w) in &row.free {
                if *j >= self.n_free {
                    return Err(SdpError::Malformed(format!(
                        "row {r}: free index {j} out of range"
                    )));
                }
                if !w.is_finite() {
                    return Err(SdpError::Malformed(format!("row {r}: non-finite coefficient")));
                }
            }
            if !row.rhs.is_finite() {
                return Err(SdpError::Malformed(format!("row {r}: non-finite rhs")));
            }
        }
        if let Some(obj) = &self.objective {
            for (l, c) in &obj.cone {
                let n = *self
                    .herm_blocks
                    .get(*l)
                    .ok_or_else(|| SdpError::Malformed(format!("objective: block {l} undeclared")))?;
                if c.nrows() != n {
                    return Err(SdpError::Malformed("objective coefficient shape".into()));
                }
            }
            for (j, _) in &obj.free {
                if *j >= self.n_free {
                    return Err(SdpError::Malformed("objective free index out of range".into()));
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Lowering
// ---------------------------------------------------------------------------

pub(crate) struct Lowered {
    pub prog: ConeProgram,
    /// Multiplicative scale applied to each kept row (divide duals by it to
    /// recover original-row multipliers).
    pub row_scale: Vec<f64>,
    /// Original row index of each kept row.
    pub kept: Vec<usize>,
    pub n_orig_rows: usize,
}

impl Lowered {
    /// Maps a dual vector on kept/scaled rows back to original rows: with
    /// rows scaled as `Ā = S·A`, original-row multipliers are `y = S·ȳ`.
    pub fn unscale_duals(&self, y: &RVec) -> Vec<f64> {
        let mut out = vec![0.0; self.n_orig_rows];
        for (k, &orig) in self.kept.iter().enumerate() {
            out[orig] = y[k] * self.row_scale[k];
        }
        out
    }
}

fn real_row(problem: &SdpProblem, cone: &[(usize, CMat)], free: &[(usize, f64)], offsets: &[usize], n_cone: usize) -> RVec {
    let n_tot = n_cone + problem.n_free;
    let mut row = RVec::zeros(n_tot);
    for (l, c) in cone {
        let seg = svec(&embed_herm(c)) * 0.5;
        let off = offsets[*l];
        let mut cur = row.rows_mut(off, seg.len());
        cur += seg;
    }
    for (j, w) in free {
        row[n_cone + j] += *w;
    }
    row
}

pub(crate) fn lower(problem: &SdpProblem) -> Result<Lowered, SdpError> {
    problem.validate()?;
    let sym_dims: Vec<usize> = problem.herm_blocks.iter().map(|&n| 2 * n).collect();
    let mut offsets = Vec::with_capacity(sym_dims.len());
    let mut off = 0usize;
    for &d in &sym_dims {
        offsets.push(off);
        off += svec_len(d);
    }
    let n_cone = off;
    let n_tot = n_cone + problem.n_free;
    let m = problem.rows.len();

    let mut a_full = RMat::zeros(m, n_tot);
    let mut b_full = RVec::zeros(m);
    for (r, row) in problem.rows.iter().enumerate() {
        let rv = real_row(problem, &row.cone, &row.free, &offsets, n_cone);
        a_full.set_row(r, &rv.transpose());
        b_full[r] = row.rhs;
    }

    // scale rows to unit 2-norm
    let mut scales = vec![1.0f64; m];
    for r in 0..m {
        let nrm = a_full.row(r).norm();
        let s = if nrm > 1e-12 { 1.0 / nrm } else { 1.0 };
        scales[r] = s;
        let scaled = a_full.row(r) * s;
        a_full.set_row(r, &scaled);
        b_full[r] *= s;
    }

    // deterministic greedy rank filter (index order) via Gram-Schmidt on rows
    let mut kept: Vec<usize> = Vec::new();
    let mut basis: Vec<RVec> = Vec::new();
    for r in 0..m {
        let mut v = a_full.row(r).transpose().into_owned();
        for q in &basis {
            let coeff = q.dot(&v);
            v -= q * coeff;
        }
        let nrm = v.norm();
        if nrm > 1e-10 {
            basis.push(v / nrm);
            kept.push(r);
        }
    }

    let mut a = RMat::zeros(kept.len(), n_tot);
    let mut b = RVec::zeros(kept.len());
    let mut row_scale = Vec::with_capacity(kept.len());
    for (k, &r) in kept.iter().enumerate() {
        a.set_row(k, &a_full.row(r));
        b[k] = b_full[r];
        row_scale.push(scales[r]);
    }

    let mut c = RVec::zeros(n_tot);
    if let Some(obj) = &problem.objective {
        let cv = real_row(problem, &obj.cone, &obj.free, &offsets, n_cone);
        c.copy_from(&cv);
    }

    Ok(Lowered {
        prog: ConeProgram {
            sym_dims,
            n_free: problem.n_free,
            a,
            b,
            c,
        },
        row_scale,
        kept,
        n_orig_rows: m,
    })
}

/// Least-squares consistency check of the *full* scaled row system; returns
/// the Farkas vector `−r` on original rows when inconsistent.
pub(crate) fn affine_inconsistency(problem: &SdpProblem) -> Result<Option<Vec<f64>>, SdpError> {
    let m = problem.rows.len();
    if m == 0 {
        return Ok(None);
    }
    let sym_dims: Vec<usize> = problem.herm_blocks.iter().map(|&n| 2 * n).collect();
    let mut offsets = Vec::with_capacity(sym_dims.len());
    let mut off = 0usize;
    for &d in &sym_dims {
        offsets.push(off);
        off += svec_len(d);
    }
    let n_cone = off;
    let n_tot = n_cone + problem.n_free;
    let mut a = RMat::zeros(m, n_tot);
    let mut b = RVec::zeros(m);
    let mut scales = vec![1.0f64; m];
    for (r, row) in problem.rows.iter().enumerate() {
        let rv = real_row(problem, &row.cone, &row.free, &offsets, n_cone);
        let nrm = rv.norm();
        let s = if nrm > 1e-12 { 1.0 / nrm } else { 1.0 };
        scales[r] = s;
        a.set_row(r, &(rv * s).transpose());
        b[r] = row.rhs * s;
    }
    // residual of projecting b onto the row-space image: r = (I − P_range(A)) b,
    // computed through the symmetric eigendecomposition of A·Aᵀ (accurate for
    // the small well-scaled systems here, unlike a generic least-squares path)
    let gram = &a * a.transpose();
    let se = gram.symmetric_eigen();
    let lam_max = se.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = 1e-12 * lam_max.max(1.0);
    let mut proj = RVec::zeros(m);
    for i in 0..m {
        if se.eigenvalues[i] > cutoff {
            let q = se.eigenvectors.column(i);
            let coeff = q.dot(&b);
            proj += q * coeff;
        }
    }
    let resid = &b - proj;
    if resid.norm() <= 1e-9 * (1.0 + b.norm()) {
        return Ok(None);
    }
    // y = −r mapped to the original (unscaled) rows
    let mut y = vec![0.0; m];
    for r in 0..m {
        y[r] = -resid[r] * scales[r];
    }
    Ok(Some(y))
}

// ---------------------------------------------------------------------------
// Margin augmentation: max t s.t. A(Y + t·I) = b, Y ⪰ 0, t ≤ cap.
// ---------------------------------------------------------------------------

pub(crate) struct MarginAug {
    pub prog: ConeProgram,
    /// Free-coordinate index of the margin variable in the augmented program.
    pub t_index: usize,
}

pub(crate) fn margin_augment(lowered: &Lowered) -> MarginAug {
    let base = &lowered.prog;
    let m = base.a.nrows();
    let n_cone = base.n_cone();
    let nf = base.n_free;
    let cap = 1e3 * (1.0 + base.b.amax());

    // new layout: cone blocks + extra 1x1 cap block, then frees + t
    let mut sym_dims = base.sym_dims.clone();
    sym_dims.push(1);
    let n_cone_new = n_cone + 1;
    let nf_new = nf + 1;
    let mut a = RMat::zeros(m + 1, n_cone_new + nf_new);
    let mut b = RVec::zeros(m + 1);
    // original rows: cone part, skip cap slot, free part, then t column = A·(cone identity)
    let id_dir = base.cone_identity();
    let t_col = &base.a * &id_dir;
    for r in 0..m {
        for j in 0..n_cone {
            a[(r, j)] = base.a[(r, j)];
        }
        for j in 0..nf {
            a[(r, n_cone_new + j)] = base.a[(r, n_cone + j)];
        }
        a[(r, n_cone_new + nf)] = t_col[r];
        b[r] = base.b[r];
    }
    // cap row: u + t = cap
    a[(m, n_cone)] = 1.0;
    a[(m, n_cone_new + nf)] = 1.0;
    b[m] = cap;

    let mut c = RVec::zeros(n_cone_new + nf_new);
    c[n_cone_new + nf] = -1.0; // max t

    MarginAug {
        prog: ConeProgram {
            sym_dims,
            n_free: nf_new,
            a,
            b,
            c,
        },
        t_index: nf,
    }
}

// ---------------------------------------------------------------------------
// Primal / dual reconstruction helpers
// ---------------------------------------------------------------------------

/// Complex Hermitian blocks from the lowered cone coordinates.
pub(crate) fn unpack_herm_blocks(problem: &SdpProblem, x: &RVec) -> Vec<CMat> {
    let mut out = Vec::with_capacity(problem.herm_blocks.len());
    let mut off = 0usize;
    for &n in &problem.herm_blocks {
        let d = 2 * n;
        let len = svec_len(d);
        let s = smat(&x.rows(off, len).into_owned(), d);
        out.push(unembed_sym(&s));
        off += len;
    }
    out
}

/// Assembles `Z_l = Σ_r y_r C_{r,l}` and the free part `Σ_r y_r w_r` for a
/// dual vector on original rows.
pub fn assemble_dual(problem: &SdpProblem, y: &[f64]) -> (Vec<CMat>, Vec<f64>) {
    let mut blocks: Vec<CMat> = problem
        .herm_blocks
        .iter()
        .map(|&n| CMat::zeros(n, n))
        .collect();
    let mut free = vec![0.0; problem.n_free];
    for (row, &yr) in problem.rows.iter().zip(y.iter()) {
        if yr == 0.0 {
            continue;
        }
        for (l, c) in &row.cone {
            blocks[*l] += c * num_complex::Complex64::new(yr, 0.0);
        }
        for (j, w) in &row.free {
            free[*j] += yr * w;
        }
    }
    (blocks, free)
}

// ---------------------------------------------------------------------------
// JSON schema (dump/load for reproducing solver instances)
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct MatDto {
    block: usize,
    mat: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct RowDto {
    cone: Vec<MatDto>,
    free: Vec<(usize, f64)>,
    rhs: f64,
}

#[derive(Serialize, Deserialize)]
struct ObjDto {
    cone: Vec<MatDto>,
    free: Vec<(usize, f64)>,
    constant: f64,
}

#[derive(Serialize, Deserialize)]
struct ProblemDto {
    blocks: Vec<usize>,
    free: usize,
    rows: Vec<RowDto>,
    objective: Option<ObjDto>,
}

fn mat_to_dto(block: usize, c: &CMat) -> MatDto {
    MatDto {
        block,
        mat: c.row_iter()
            .flat_map(|r| r.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
            .collect(),
    }
}

fn mat_from_dto(dto: &MatDto, n: usize) -> Result<CMat, SdpError> {
    if dto.mat.len() != n * n {
        return Err(SdpError::Serialization(format!(
            "matrix for block {} must have {} entries",
            dto.block,
            n * n
        )));
    }
    Ok(CMat::from_fn(n, n, |r, c| {
        let [re, im] = dto.mat[r * n + c];
        num_complex::Complex64::new(re, im)
    }))
}

impl SdpProblem {
    pub fn to_json(&self) -> String {
        let dto = ProblemDto {
            blocks: self.herm_blocks.clone(),
            free: self.n_free,
            rows: self
                .rows
                .iter()
                .map(|r| RowDto {
                    cone: r.cone.iter().map(|(l, c)| mat_to_dto(*l, c)).collect(),
                    free: r.free.clone(),
                    rhs: r.rhs,
                })
                .collect(),
            objective: self.objective.as_ref().map(|o| ObjDto {
                cone: o.cone.iter().map(|(l, c)| mat_to_dto(*l, c)).collect(),
                free: o.free.clone(),
                constant: o.constant,
            }),
        };
        serde_json::to_string_pretty(&dto).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self, SdpError> {
        let dto: ProblemDto =
            serde_json::from_str(s).map_err(|e| SdpError::Serialization(e.to_string()))?;
        let mut p = SdpProblem {
            herm_blocks: dto.blocks,
            n_free: dto.free,
            rows: Vec::new(),
            objective: None,
        };
        let dim_of = |l: usize| -> Result<usize, SdpError> {
            p.herm_blocks
                .get(l)
                .cloned()
                .ok_or_else(|| SdpError::Serialization(format!("block {l} undeclared")))
        };
        for r in &dto.rows {
            let mut cone = Vec::new();
            for md in &r.cone {
                cone.push((md.block, mat_from_dto(md, dim_of(md.block)?)?));
            }
            p.rows.push(SdpRow {
                cone,
                free: r.free.clone(),
                rhs: r.rhs,
            });
        }
        if let Some(o) = &dto.objective {
            let mut cone = Vec::new();
            for md in &o.cone {
                cone.push((md.block, mat_from_dto(md, dim_of(md.block)?)?));
            }
            p.objective = Some(SdpObjective {
                cone,
                free: o.free.clone(),
                constant: o.constant,
            });
        }
        p.validate()?;
        Ok(p)
    }
}
