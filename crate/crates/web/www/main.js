import init, { channelHeatmap, convergenceTraces, detectConstellation } from "./pkg/l3blind_web.js";

const USER_COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
  "#bcbd22", "#17becf"];

function fields(form) {
  const out = {};
  for (const el of form.elements) {
    if (!el.name) continue;
    out[el.name] = el.type === "checkbox" ? el.checked : el.type === "number" ? Number(el.value) : el.value;
  }
  return out;
}

function report(id, text, isError = false) {
  const el = document.getElementById(id);
  el.textContent = text;
  el.className = isError ? "stats error" : "stats";
}

// Black to yellow through purple and orange.
function heat(v) {
  const stops = [[0, 0, 4], [87, 16, 110], [188, 55, 84], [249, 142, 9], [252, 255, 164]];
  const x = Math.min(Math.max(v, 0), 1) * (stops.length - 1);
  const i = Math.min(Math.floor(x), stops.length - 2);
  const f = x - i;
  const c = stops[i].map((a, j) => Math.round(a + f * (stops[i + 1][j] - a)));
  return `rgb(${c[0]},${c[1]},${c[2]})`;
}

function drawHeatmap(form) {
  const p = fields(form);
  const h = channelHeatmap(p.model === "clustered", p.k, p.nh, p.nv, p.theta, p.paths, p.seed);
  const values = h.values();
  const max = values.reduce((a, b) => Math.max(a, b), 0) || 1;
  const canvas = document.getElementById("heatmap");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  // Users as rows, angular bins as columns.
  const cw = canvas.width / h.rows;
  const rh = canvas.height / h.cols;
  for (let m = 0; m < h.rows; m++) {
    for (let k = 0; k < h.cols; k++) {
      ctx.fillStyle = heat(values[m * h.cols + k] / max);
      ctx.fillRect(m * cw, k * rh, Math.ceil(cw), Math.ceil(rh));
    }
  }
  report("heatmap-stats", `M = ${h.rows}, K = ${h.cols}, entries above 1% of max: ${(100 * h.thetaEffective).toFixed(1)}%`);
  h.free();
}

function drawTraces(form) {
  const p = fields(form);
  const tr = convergenceTraces(p.k, p.m, p.t, p.theta, p.snr, p.seed);
  const series = [["ℓ3 (p = 3)", tr.l3(), USER_COLORS[0]], ["ℓ4 (p = 4)", tr.l4(), USER_COLORS[1]]];
  const planted = tr.planted;
  tr.free();

  const canvas = document.getElementById("traces");
  const ctx = canvas.getContext("2d");
  const pad = { l: 50, r: 20, t: 15, b: 30 };
  const w = canvas.width - pad.l - pad.r;
  const hgt = canvas.height - pad.t - pad.b;
  const n = Math.max(...series.map(s => s[1].length));
  const all = series.flatMap(s => Array.from(s[1])).concat([planted]);
  const lo = Math.min(0, ...all);
  const hi = Math.max(...all) * 1.05;
  const x = i => pad.l + (n > 1 ? (i / (n - 1)) * w : 0);
  const y = v => pad.t + hgt - ((v - lo) / (hi - lo)) * hgt;

  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad.l, pad.t, w, hgt);
  ctx.fillStyle = "#444";
  ctx.font = "12px sans-serif";
  for (let k = 0; k <= 4; k++) {
    const v = lo + (k / 4) * (hi - lo);
    ctx.fillText(v.toFixed(2), 5, y(v) + 4);
  }
  ctx.fillText("iteration", pad.l + w / 2 - 20, canvas.height - 8);
  ctx.fillText(`${n - 1}`, pad.l + w - 10, canvas.height - 8);

  ctx.setLineDash([5, 4]);
  ctx.strokeStyle = "#555";
  ctx.beginPath();
  ctx.moveTo(pad.l, y(planted));
  ctx.lineTo(pad.l + w, y(planted));
  ctx.stroke();
  ctx.setLineDash([]);

  series.forEach(([name, values, color], s) => {
    ctx.strokeStyle = color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    values.forEach((v, i) => (i ? ctx.lineTo(x(i), y(v)) : ctx.moveTo(x(i), y(v))));
    ctx.stroke();
    ctx.fillStyle = color;
    ctx.fillText(name, pad.l + w - 110, pad.t + hgt - 40 + 16 * s);
  });
  ctx.lineWidth = 1;

  const last = s => s[1][s[1].length - 1].toFixed(4);
  report("trace-stats",
    `normalized ℓ3 objective: ℓ3 run ${last(series[0])} after ${series[0][1].length - 1} steps, ` +
    `ℓ4 run ${last(series[1])} after ${series[1][1].length - 1} steps; true frame (dashed) ${planted.toFixed(4)}`);
}

function drawScatter(form) {
  const p = fields(form);
  const d = detectConstellation(p.model === "clustered", p.alphabet === "qam16", p.k, 16, 16, p.t, p.theta, p.snr,
    p.pre, p.seed);
  const pts = d.points();
  const users = d.users();
  const stats = `EVM ${d.evm.toFixed(4)}, SER ${d.ser.toFixed(4)}, ${d.iters} iterations`;
  d.free();

  const canvas = document.getElementById("scatter");
  const ctx = canvas.getContext("2d");
  const half = canvas.width / 2;
  const span = 1.6;
  const px = v => half + (v / span) * half;
  const py = v => half - (v / span) * half;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.strokeStyle = "#ddd";
  ctx.beginPath();
  ctx.moveTo(0, half);
  ctx.lineTo(canvas.width, half);
  ctx.moveTo(half, 0);
  ctx.lineTo(half, canvas.height);
  ctx.stroke();
  for (let i = 0; i < users.length; i++) {
    ctx.fillStyle = USER_COLORS[users[i] % USER_COLORS.length];
    ctx.fillRect(px(pts[2 * i]) - 1.5, py(pts[2 * i + 1]) - 1.5, 3, 3);
  }
  report("detect-stats", stats);
}

function wire(formId, statsId, draw) {
  const form = document.getElementById(formId);
  const run = () => {
    try {
      draw(form);
    } catch (e) {
      report(statsId, String(e.message ?? e), true);
    }
  };
  form.addEventListener("submit", e => {
    e.preventDefault();
    run();
  });
  run();
}

await init();
wire("heatmap-form", "heatmap-stats", drawHeatmap);
wire("trace-form", "trace-stats", drawTraces);
wire("detect-form", "detect-stats", drawScatter);
