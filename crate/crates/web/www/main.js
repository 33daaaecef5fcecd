import init, { Field, DemoTrainer, material_curves } from "./pkg/mcnn_web.js";

const $ = (id) => document.getElementById(id);
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

// Minimal line plot: series = [{x, y, color, dash, label}].
function plot(canvas, series, { xlabel = "", ylabel = "", logy = false, ymin, ymax } = {}) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, L = 48, R = 10, T = 10, B = 34;
  ctx.clearRect(0, 0, W, H);
  const fy = logy ? (v) => Math.log10(Math.max(v, 1e-300)) : (v) => v;
  let x0 = Infinity, x1 = -Infinity, y0 = Infinity, y1 = -Infinity;
  for (const s of series) {
    s.x.forEach((v) => { x0 = Math.min(x0, v); x1 = Math.max(x1, v); });
    s.y.forEach((v) => { if (Number.isFinite(fy(v))) { y0 = Math.min(y0, fy(v)); y1 = Math.max(y1, fy(v)); } });
  }
  if (ymin !== undefined) y0 = fy(ymin);
  if (ymax !== undefined) y1 = fy(ymax);
  if (!(x1 > x0)) x1 = x0 + 1;
  if (!(y1 > y0)) { y1 = y0 + 1e-9 + Math.abs(y0) * 0.01; }
  const px = (v) => L + ((v - x0) / (x1 - x0)) * (W - L - R);
  const py = (v) => H - B - ((fy(v) - y0) / (y1 - y0)) * (H - T - B);

  ctx.strokeStyle = "#999"; ctx.fillStyle = "#444"; ctx.font = "11px system-ui"; ctx.lineWidth = 1;
  ctx.strokeRect(L, T, W - L - R, H - T - B);
  for (let k = 0; k <= 4; k++) {
    const xv = x0 + ((x1 - x0) * k) / 4, yv = y0 + ((y1 - y0) * k) / 4;
    ctx.fillText(xv.toPrecision(2), px(xv) - 10, H - B + 14);
    ctx.fillText(logy ? "1e" + yv.toFixed(1) : yv.toPrecision(3), 2, H - B - ((yv - y0) / (y1 - y0)) * (H - T - B) + 4);
  }
  ctx.fillText(xlabel, W / 2, H - 4);
  ctx.save(); ctx.translate(10, T + 12); ctx.fillText(ylabel, 0, 0); ctx.restore();

  series.forEach((s, i) => {
    ctx.strokeStyle = s.color || COLORS[i % COLORS.length];
    ctx.setLineDash(s.dash ? [5, 4] : []);
    ctx.lineWidth = s.width || 1.5;
    ctx.beginPath();
    s.x.forEach((xv, k) => {
      const yv = s.y[k];
      if (!Number.isFinite(fy(yv))) return;
      k === 0 ? ctx.moveTo(px(xv), py(yv)) : ctx.lineTo(px(xv), py(yv));
    });
    ctx.stroke();
    if (s.label) { ctx.fillStyle = ctx.strokeStyle; ctx.fillText(s.label, W - R - 90, T + 14 + 13 * i); }
  });
  ctx.setLineDash([]);
}

// ---- 1. reference solution ---------------------------------------------

const SNAPSHOTS = 50;
let field = null;

function props() {
  return {
    law: +$("fd-law").value, jbar: +$("fd-jbar").value, phi0: +$("fd-phi0").value,
    gamma: +$("fd-gamma").value, mu: +$("fd-mu").value,
  };
}

function solve() {
  const p = props();
  for (const k of ["jbar", "phi0", "gamma", "mu"]) $(`fd-${k}-v`).textContent = p[k].toFixed(2);
  try {
    const t0 = performance.now();
    field?.free();
    field = new Field(p.law, p.jbar, p.phi0, p.gamma, p.mu, SNAPSHOTS);
    $("fd-info").textContent = `solved in ${(performance.now() - t0).toFixed(0)} ms`;
    $("status").textContent = "";
  } catch (e) {
    field = null;
    $("status").textContent = String(e.message || e);
  }
  drawField();
  drawLaws();
}

function drawField() {
  if (!field) return;
  const x = field.x(), t = field.t(), j = field.j(), n = x.length;
  const snap = +$("fd-snap").value;
  $("fd-snap-v").textContent = `t = ${t[snap].toFixed(2)}`;
  const picks = [0, 4, 9, 24, 49];
  const series = picks.map((k, i) => ({ x, y: j.slice(k * n, (k + 1) * n), label: `t=${t[k].toFixed(2)}`, color: COLORS[i] }));
  series.push({ x, y: j.slice(snap * n, (snap + 1) * n), color: "#000", dash: true, width: 2 });
  plot($("fd-j"), series, { xlabel: "X", ylabel: "J", ymax: 1.0 });
  const u = field.settlement(snap), pr = field.pressure(snap);
  plot($("fd-u"), [{ x, y: u, label: "settlement U" }], { xlabel: "X", ylabel: "U" });
  $("fd-info").textContent += ` · U(0) = ${u[0].toFixed(4)} · p(1) = ${pr[n - 1].toFixed(4)}`;
}

// ---- 2. constitutive curves ----------------------------------------------

function drawLaws() {
  const p = props(), n = 200, g = [], d = [];
  for (let law = 1; law <= 3; law++) {
    try {
      const c = material_curves(law, p.phi0, p.gamma, p.mu, n);
      const J = c.slice(0, n);
      g.push({ x: J, y: c.slice(n, 2 * n), label: `law ${law}` });
      d.push({ x: J, y: c.slice(2 * n), label: `law ${law}` });
    } catch (e) { return; }
  }
  plot($("law-g"), g, { xlabel: "J", ylabel: "stiffness g(J)" });
  plot($("law-d"), d, { xlabel: "J", ylabel: "diffusivity D/φ₀³", logy: true });
}

// ---- 3. in-browser training -----------------------------------------------

let trainer = null, running = false, losses = [], reference = [];

function resetTrainer() {
  running = false;
  $("nn-run").textContent = "train";
  trainer?.free();
  try {
    trainer = new DemoTrainer(BigInt($("nn-seed").value), +$("nn-layers").value, +$("nn-width").value,
      +$("nn-points").value, +$("nn-lr").value);
  } catch (e) {
    trainer = null;
    $("status").textContent = String(e.message || e);
    return;
  }
  losses = [];
  reference = [1, 2, 3].map((law) => {
    const f = new Field(law, 0.8, 0.3, 1 / 3, 1 / 3, 10);
    const out = { x: f.x(), j: f.j() };
    f.free();
    return out;
  });
  drawTrainer();
}

function drawTrainer() {
  if (!trainer) return;
  const law = +$("nn-law").value, ref = reference[law - 1], n = ref.x.length;
  const pred = trainer.predict(law, n, 10);
  const series = [];
  [0, 4, 9].forEach((k, i) => {
    series.push({ x: ref.x, y: ref.j.slice(k * n, (k + 1) * n), color: COLORS[i], label: `t=${(k + 1) / 10}` });
    series.push({ x: ref.x, y: pred.slice(k * n, (k + 1) * n), color: COLORS[i], dash: true });
  });
  plot($("nn-j"), series, { xlabel: "X  (solid: reference, dashed: network)", ylabel: "J" });
  if (losses.length > 1) {
    plot($("nn-loss"), [{ x: losses.map((_, i) => i * 10), y: losses }], { xlabel: "epoch", ylabel: "loss", logy: true });
  }
  const errs = [1, 2, 3].map((l) => trainer.relative_error(l).toFixed(2) + "%").join(" / ");
  $("nn-info").textContent = `epoch ${trainer.epoch()} · loss ${trainer.loss().toExponential(3)} · error ${errs}`;
}

function loop() {
  if (!running || !trainer) return;
  try {
    losses.push(trainer.train(10));
  } catch (e) {
    running = false;
    $("status").textContent = String(e.message || e);
  }
  drawTrainer();
  requestAnimationFrame(loop);
}

// ---- wiring ---------------------------------------------------------------

await init();
$("status").textContent = "";
for (const id of ["fd-law", "fd-jbar", "fd-phi0", "fd-gamma", "fd-mu"]) $(id).addEventListener("change", solve);
$("fd-snap").addEventListener("input", drawField);
$("nn-reset").addEventListener("click", resetTrainer);
$("nn-law").addEventListener("change", drawTrainer);
$("nn-run").addEventListener("click", () => {
  running = !running;
  $("nn-run").textContent = running ? "pause" : "train";
  loop();
});
solve();
resetTrainer();
