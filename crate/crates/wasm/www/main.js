import init, { bicCurve, partition, wrapDemo } from "./pkg/krf_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function showError(e) {
  $("error").textContent = e ? String(e.message ?? e) : "";
}

function guarded(fn) {
  return () => {
    showError(null);
    try {
      fn();
    } catch (e) {
      showError(e);
    }
  };
}

// viridis-like ramp, t in [0, 1]
const RAMP = [[68, 1, 84], [59, 82, 139], [33, 145, 140], [94, 201, 98], [253, 231, 37]];
function color(t) {
  t = Math.min(1, Math.max(0, Number.isFinite(t) ? t : 0)) * (RAMP.length - 1);
  const i = Math.min(RAMP.length - 2, Math.floor(t));
  const f = t - i;
  const c = RAMP[i].map((v, j) => Math.round(v + f * (RAMP[i + 1][j] - v)));
  return `rgb(${c[0]},${c[1]},${c[2]})`;
}

function axes(ctx, w, h, pad, xlabel, ylabel) {
  ctx.strokeStyle = "#888";
  ctx.beginPath();
  ctx.moveTo(pad, pad / 2);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - pad / 2, h - pad);
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.font = "12px system-ui";
  ctx.fillText(xlabel, w / 2 - 20, h - 6);
  ctx.save();
  ctx.translate(12, h / 2 + 20);
  ctx.rotate(-Math.PI / 2);
  ctx.fillText(ylabel, 0, 0);
  ctx.restore();
}

// ---- 1. BIC curve ----------------------------------------------------------

function parseValues(text) {
  return text
    .split(/[\s,;]+/)
    .filter((s) => s.length > 0)
    .map(Number);
}

function drawBic(curve, best) {
  const cv = $("bic-plot");
  const ctx = cv.getContext("2d");
  const { width: w, height: h } = cv;
  const pad = 40;
  ctx.clearRect(0, 0, w, h);
  axes(ctx, w, h, pad, "K", "BIC");
  const finite = curve.filter(Number.isFinite);
  if (finite.length === 0) return;
  const lo = Math.min(...finite);
  const hi = Math.max(...finite);
  const span = hi - lo || 1;
  const x = (i) => pad + ((i + 0.5) / curve.length) * (w - 1.5 * pad);
  const y = (v) => h - pad - ((v - lo) / span) * (h - 1.6 * pad) - 4;
  ctx.strokeStyle = "#3b528b";
  ctx.beginPath();
  let open = false;
  curve.forEach((v, i) => {
    if (!Number.isFinite(v)) {
      open = false;
      return;
    }
    open ? ctx.lineTo(x(i), y(v)) : ctx.moveTo(x(i), y(v));
    open = true;
  });
  ctx.stroke();
  curve.forEach((v, i) => {
    ctx.fillStyle = "#444";
    ctx.fillText(String(i + 1), x(i) - 4, h - pad + 14);
    if (!Number.isFinite(v)) return;
    ctx.fillStyle = i === best ? "#d62728" : "#3b528b";
    ctx.beginPath();
    ctx.arc(x(i), y(v), i === best ? 5 : 3, 0, 2 * Math.PI);
    ctx.fill();
  });
}

function drawStrip(values, circular) {
  const cv = $("bic-strip");
  const ctx = cv.getContext("2d");
  const { width: w, height: h } = cv;
  ctx.clearRect(0, 0, w, h);
  ctx.fillStyle = "rgba(59, 82, 139, 0.6)";
  if (circular) {
    const r = Math.min(w, h) / 2 - 20;
    ctx.strokeStyle = "#888";
    ctx.beginPath();
    ctx.arc(w / 2, h / 2, r, 0, 2 * Math.PI);
    ctx.stroke();
    ctx.fillText("0°", w / 2 + r + 4, h / 2 + 4);
    ctx.fillText("90°", w / 2 - 8, h / 2 - r - 6);
    for (const d of values) {
      const a = (d * Math.PI) / 180;
      ctx.beginPath();
      ctx.arc(w / 2 + r * Math.cos(a), h / 2 - r * Math.sin(a), 5, 0, 2 * Math.PI);
      ctx.fill();
    }
    return;
  }
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const span = hi - lo || 1;
  ctx.strokeStyle = "#888";
  ctx.beginPath();
  ctx.moveTo(20, h / 2);
  ctx.lineTo(w - 20, h / 2);
  ctx.stroke();
  values.forEach((v, i) => {
    ctx.beginPath();
    ctx.arc(20 + ((v - lo) / span) * (w - 40), h / 2 + ((i % 5) - 2) * 6, 5, 0, 2 * Math.PI);
    ctx.fill();
  });
  ctx.fillStyle = "#444";
  ctx.fillText(lo.toPrecision(4), 14, h / 2 + 30);
  ctx.fillText(hi.toPrecision(4), w - 60, h / 2 + 30);
}

function runBic() {
  const values = parseValues($("bic-values").value);
  if (values.some((v) => !Number.isFinite(v))) throw new Error("every value must be a number");
  const circular = $("bic-circular").checked;
  const curve = Array.from(bicCurve(new Float64Array(values), circular, num("bic-kmax"), 0));
  let best = -1;
  curve.forEach((v, i) => {
    if (i >= 1 && Number.isFinite(v) && (best < 0 || v < curve[best])) best = i;
  });
  drawBic(curve, best);
  drawStrip(values, circular);
  $("bic-out").textContent =
    `N = ${values.length}; ` +
    curve.map((v, i) => `K=${i + 1}: ${Number.isFinite(v) ? v.toFixed(2) : "n/a"}`).join("  ") +
    (best >= 1 ? `  →  chosen K = ${best + 1}` : "  →  no K ≥ 2 computable");
}

function randomBlobs() {
  const circular = $("bic-circular").checked;
  const k = 2 + Math.floor(Math.random() * 4);
  const out = [];
  for (let j = 0; j < k; j++) {
    const c = circular ? (360 * j) / k + Math.random() * 20 : Math.random() * 100;
    const s = circular ? 6 : 2;
    for (let i = 0; i < 12; i++) {
      // sum of uniforms, roughly normal
      const z = Math.random() + Math.random() + Math.random() - 1.5;
      let v = c + 2 * s * z;
      if (circular) v = ((v % 360) + 360) % 360;
      out.push(Number(v.toFixed(1)));
    }
  }
  $("bic-values").value = out.join(", ");
  runBic();
}

// ---- 2. partitions ---------------------------------------------------------

const RES = 80;

function runPartition() {
  const view = partition(
    num("part-seed"),
    num("part-n"),
    num("part-regions"),
    num("part-noise"),
    $("part-splitter").value,
    num("part-k"),
    num("part-trees"),
    RES,
  );
  const pts = view.points;
  const grid = view.grid;
  let lo = Infinity;
  let hi = -Infinity;
  for (let i = 2; i < pts.length; i += 3) {
    lo = Math.min(lo, pts[i]);
    hi = Math.max(hi, pts[i]);
  }
  const t = (v) => (v - lo) / (hi - lo || 1);

  const truth = $("part-truth").getContext("2d");
  const pred = $("part-pred").getContext("2d");
  const size = $("part-truth").width;
  const px = (x) => ((x + 1) / 2) * size;
  const py = (y) => ((1 - y) / 2) * size;

  truth.fillStyle = "#fff";
  truth.fillRect(0, 0, size, size);
  for (let i = 0; i < pts.length; i += 3) {
    truth.fillStyle = color(t(pts[i + 2]));
    truth.fillRect(px(pts[i]) - 2, py(pts[i + 1]) - 2, 5, 5);
  }

  const cell = size / RES;
  for (let r = 0; r < RES; r++) {
    for (let c = 0; c < RES; c++) {
      pred.fillStyle = color(t(grid[r * RES + c]));
      pred.fillRect(c * cell, r * cell, cell + 0.5, cell + 0.5);
    }
  }
  $("part-out").textContent =
    `held-out MAE ${view.testMae.toFixed(3)}   mean leaves per tree ${view.meanLeaves.toFixed(1)}`;
  view.free();
}

// ---- 3. wrap-around --------------------------------------------------------

function runWrap() {
  const view = wrapDemo(num("wrap-seed"), num("wrap-n"), num("wrap-noise"), num("wrap-center"), num("wrap-spread"), 200);
  const cv = $("wrap-plot");
  const ctx = cv.getContext("2d");
  const { width: w, height: h } = cv;
  const pad = 40;
  ctx.clearRect(0, 0, w, h);
  axes(ctx, w, h, pad, "input x", "angle (deg)");
  const X = (x) => pad + ((x + 1) / 2) * (w - 1.5 * pad);
  // the euclidean forest can predict outside [0, 360), so widen the range if needed
  const eu = Array.from(view.euclidean);
  const lo = Math.min(0, ...eu);
  const hi = Math.max(360, ...eu);
  const Y = (a) => h - pad - ((a - lo) / (hi - lo)) * (h - 1.6 * pad);

  ctx.fillStyle = "#444";
  for (const a of [0, 90, 180, 270, 360]) {
    ctx.fillText(String(a), pad - 28, Y(a) + 4);
  }
  const pts = view.points;
  ctx.fillStyle = "rgba(120, 120, 120, 0.45)";
  for (let i = 0; i < pts.length; i += 2) {
    ctx.fillRect(X(pts[i]) - 1.5, Y(pts[i + 1]) - 1.5, 3, 3);
  }

  const line = (ys, stroke, breakAtWrap) => {
    const xs = view.xs;
    ctx.strokeStyle = stroke;
    ctx.lineWidth = 2.5;
    ctx.beginPath();
    for (let i = 0; i < xs.length; i++) {
      const jump = i > 0 && breakAtWrap && Math.abs(ys[i] - ys[i - 1]) > 180;
      i === 0 || jump ? ctx.moveTo(X(xs[i]), Y(ys[i])) : ctx.lineTo(X(xs[i]), Y(ys[i]));
    }
    ctx.stroke();
    ctx.lineWidth = 1;
  };
  line(view.circular, "#1f77b4", true);
  line(eu, "#ff7f0e", false);

  ctx.fillStyle = "#1f77b4";
  ctx.fillText("circular forest", w - 150, 18);
  ctx.fillStyle = "#ff7f0e";
  ctx.fillText("degrees as numbers", w - 150, 34);
  $("wrap-out").textContent =
    `held-out MAE: circular ${view.circularMae.toFixed(2)}°   degrees-as-numbers ${view.euclideanMae.toFixed(2)}°`;
  view.free();
}

await init();
$("bic-values").addEventListener("input", guarded(runBic));
$("bic-circular").addEventListener("change", guarded(runBic));
$("bic-kmax").addEventListener("change", guarded(runBic));
$("bic-random").addEventListener("click", guarded(randomBlobs));
$("part-run").addEventListener("click", guarded(runPartition));
$("wrap-run").addEventListener("click", guarded(runWrap));
guarded(runBic)();
guarded(runPartition)();
guarded(runWrap)();
