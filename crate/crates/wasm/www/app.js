import init, { quote, cost_curve, diff_grid } from "./pkg/fxswap_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);
const fmt = (x, d = 4) => (Number.isFinite(x) ? x.toFixed(d) : "n/a");

function market() {
  return { eur: num("rate-eur"), sgd: num("rate-sgd"), gas: num("gas"), tvl: num("tvl") };
}

function renderQuote() {
  const m = market();
  const out = $("quote-out");
  try {
    const d = JSON.parse(quote($("preset").value, $("pair").value, num("volume"), m.eur, m.sgd, m.gas, m.tvl));
    const rows = d.candidates.map((c) => {
      const chosen = c.venue_id === d.chosen.venue_id && c.pool_id === d.chosen.pool_id;
      const b = c.breakdown;
      return `<tr class="${chosen ? "chosen" : ""}"><td>${c.venue_id}</td><td>${c.pool_id}</td>` +
        `<td>${fmt(c.quote.input_amount, 2)}</td><td>${fmt(b.gas_fee)}</td><td>${fmt(b.lp_fee)}</td>` +
        `<td>${fmt(b.price_impact_cost)}</td><td>${fmt(b.total)}</td></tr>`;
    });
    out.innerHTML = `<table><tr><th>venue</th><th>pool</th><th>paid</th><th>gas</th><th>lp fee</th>` +
      `<th>impact</th><th>total (EUR)</th></tr>${rows.join("")}</table>`;
  } catch (e) {
    out.innerHTML = `<p class="err">${e.message ?? e}</p>`;
  }
}

function renderCurve() {
  const m = market();
  const canvas = $("curve");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const series = [["l1-mariana", "#c0392b"], ["l2l3-exchange", "#2471a3"]].map(([name, color]) => {
    try {
      return { color, pts: JSON.parse(cost_curve(name, m.eur, m.sgd, m.gas, m.tvl, 1, 1e6, 120)) };
    } catch (e) {
      return { color, pts: [] };
    }
  });
  const bps = (p) => (p.total / p.volume) * 1e4;
  const all = series.flatMap((s) => s.pts.filter((p) => Number.isFinite(p.total)).map(bps));
  if (all.length === 0) return;
  const pad = 40;
  const yMax = Math.log10(Math.max(...all));
  const yMin = Math.log10(Math.max(Math.min(...all), 1e-3));
  const x = (v) => pad + ((Math.log10(v) - 0) / 6) * (canvas.width - 2 * pad);
  const y = (b) => canvas.height - pad - ((Math.log10(b) - yMin) / (yMax - yMin || 1)) * (canvas.height - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#555";
  ctx.beginPath();
  ctx.moveTo(pad, pad);
  ctx.lineTo(pad, canvas.height - pad);
  ctx.lineTo(canvas.width - pad, canvas.height - pad);
  ctx.stroke();
  for (let e = 0; e <= 6; e++) ctx.fillText(`1e${e}`, x(10 ** e) - 8, canvas.height - pad + 14);
  for (let e = Math.ceil(yMin); e <= Math.floor(yMax); e++) ctx.fillText(`${10 ** e}bp`, 2, y(10 ** e) + 4);

  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    let started = false;
    for (const p of s.pts) {
      if (!Number.isFinite(p.total)) continue;
      const [px, py] = [x(p.volume), y(bps(p))];
      started ? ctx.lineTo(px, py) : ctx.moveTo(px, py);
      started = true;
    }
    ctx.stroke();
  }
}

function renderGrid() {
  const m = market();
  const canvas = $("grid");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  let g;
  try {
    g = JSON.parse(diff_grid(m.eur, m.sgd, m.tvl, 1, 1000, 20, 1, 1e6, 30));
  } catch (e) {
    $("grid-info").innerHTML = `<p class="err">${e.message ?? e}</p>`;
    return;
  }
  const pad = 40;
  const cw = (canvas.width - 2 * pad) / g.volume.length;
  const ch = (canvas.height - 2 * pad) / g.gas.length;
  let l1Wins = 0;
  g.diff_pct.forEach((row, gi) => {
    row.forEach((pct, vi) => {
      const a = Math.min(Math.abs(pct) / 100, 1);
      if (pct < 0) l1Wins++;
      ctx.fillStyle = pct >= 0 ? `rgba(39,174,96,${0.15 + 0.85 * a})` : `rgba(192,57,43,${0.15 + 0.85 * a})`;
      ctx.fillRect(pad + vi * cw, canvas.height - pad - (gi + 1) * ch, cw + 0.5, ch + 0.5);
    });
  });
  ctx.fillStyle = "#555";
  ctx.fillText("volume (EUR, log) →", canvas.width / 2 - 40, canvas.height - 10);
  for (let e = 0; e <= 6; e++) ctx.fillText(`1e${e}`, pad + (e / 6) * (canvas.width - 2 * pad) - 8, canvas.height - pad + 14);
  [1, 10, 100, 1000].forEach((v) => ctx.fillText(`${v}`, 4, canvas.height - pad - (Math.log10(v) / 3) * (canvas.height - 2 * pad) + 4));
  $("grid-info").textContent = `${l1Wins} of ${g.gas.length * g.volume.length} cells favour l1-mariana`;
}

function renderAll() {
  renderQuote();
  renderCurve();
  renderGrid();
}

await init();
for (const id of ["rate-eur", "rate-sgd", "gas", "tvl"]) $(id).addEventListener("change", renderAll);
for (const id of ["preset", "pair", "volume"]) $(id).addEventListener("change", renderQuote);
renderAll();
