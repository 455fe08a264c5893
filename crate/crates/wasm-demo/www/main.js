// Static glue for the coughdet demo. Expects the wasm-pack output in
// ./pkg (wasm-pack build --target web --out-dir www/pkg).

import init, { DemoSession } from "./pkg/coughdet_wasm.js";

const $ = (id) => document.getElementById(id);
const status = $("status");

let session = null;
let audioCtx = null;

function setBusy(busy, message) {
  for (const id of ["synthesize", "rank", "evaluate", "play"]) {
    $(id).disabled = busy || (id !== "synthesize" && session === null);
  }
  status.textContent = message || "";
}

function drawWaveform(info) {
  const canvas = $("waveform");
  const ctx = canvas.getContext("2d");
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);

  // cough segments behind the waveform
  ctx.fillStyle = "#f3c6c0";
  for (const seg of info.segments) {
    const x0 = (seg.start / info.duration) * width;
    const x1 = (seg.end / info.duration) * width;
    ctx.fillRect(x0, 0, Math.max(x1 - x0, 1.5), height);
  }

  ctx.strokeStyle = "#0b62a4";
  ctx.lineWidth = 1;
  ctx.beginPath();
  const mid = height / 2;
  const cols = info.envelope.length;
  for (let i = 0; i < cols; i++) {
    const [lo, hi] = info.envelope[i];
    const x = ((i + 0.5) / cols) * width;
    ctx.moveTo(x, mid - hi * mid * 0.95);
    ctx.lineTo(x, mid - lo * mid * 0.95);
  }
  ctx.stroke();

  $("synth-summary").textContent =
    ` ${info.frames} frames, ${info.cough_frames} labeled cough` +
    ` (${((100 * info.cough_frames) / info.frames).toFixed(1)}%).`;
}

function drawRoc(result) {
  const canvas = $("roc");
  const ctx = canvas.getContext("2d");
  const { width, height } = canvas;
  const margin = 70;
  const span = width - 2 * margin;
  const px = (fpr) => margin + fpr * span;
  const py = (tpr) => height - margin - tpr * span;

  ctx.clearRect(0, 0, width, height);
  ctx.strokeStyle = "#dde3e8";
  ctx.lineWidth = 2;
  ctx.font = "24px system-ui";
  ctx.fillStyle = "#53616e";
  for (let i = 0; i <= 5; i++) {
    const t = i / 5;
    ctx.beginPath();
    ctx.moveTo(px(t), py(0));
    ctx.lineTo(px(t), py(1));
    ctx.moveTo(px(0), py(t));
    ctx.lineTo(px(1), py(t));
    ctx.stroke();
    ctx.fillText(t.toFixed(1), px(t) - 18, height - margin + 32);
    ctx.fillText(t.toFixed(1), margin - 52, py(t) + 8);
  }
  ctx.strokeStyle = "#c4cdd5";
  ctx.setLineDash([8, 6]);
  ctx.beginPath();
  ctx.moveTo(px(0), py(0));
  ctx.lineTo(px(1), py(1));
  ctx.stroke();
  ctx.setLineDash([]);

  ctx.strokeStyle = "#0b62a4";
  ctx.lineWidth = 3;
  ctx.beginPath();
  result.points.forEach(([fpr, tpr], i) => {
    if (i === 0) ctx.moveTo(px(fpr), py(tpr));
    else ctx.lineTo(px(fpr), py(tpr));
  });
  ctx.stroke();

  ctx.fillStyle = "#d43d30";
  ctx.beginPath();
  ctx.arc(px(result.fpr), py(result.tpr), 8, 0, 2 * Math.PI);
  ctx.fill();

  const fmt = (v) => v.toFixed(4);
  $("eval-metrics").innerHTML = `
    <div>RER<strong>${fmt(result.rer)}</strong></div>
    <div>AUC<strong>${fmt(result.auc)}</strong></div>
    <div>TPR<strong>${fmt(result.tpr)}</strong></div>
    <div>FPR<strong>${fmt(result.fpr)}</strong></div>
    <div>threshold<strong>${fmt(result.rer_threshold)}</strong></div>`;
}

function renderRanking(result) {
  const rows = result.order
    .map(
      (f, i) => `<tr><td class="num">${i + 1}</td><td>${f.name}</td>` +
        `<td class="num">${f.score_bits.toFixed(4)}</td>` +
        `<td class="num">${f.intrinsic_pct.toFixed(1)}%</td></tr>`
    )
    .join("");
  $("rank-output").innerHTML = `
    <table>
      <thead><tr><th class="num">#</th><th>feature</th>
      <th class="num">greedy objective (bits)</th>
      <th class="num">intrinsic info (% of H(C))</th></tr></thead>
      <tbody>${rows}</tbody>
    </table>
    <div class="legend">class entropy H(C) =
      ${result.class_entropy_bits.toFixed(4)} bits; the objective subtracts each
      candidate's worst pairwise redundancy with the already selected set.</div>`;
}

async function synthesize() {
  setBusy(true, "synthesizing and extracting features…");
  await new Promise((r) => setTimeout(r, 20)); // let the status paint
  try {
    if (session) session.free();
    session = new DemoSession(
      Number($("seed").value),
      Number($("duration").value),
      Number($("coughs").value),
      Number($("distractors").value),
      Number($("noise").value)
    );
    drawWaveform(JSON.parse(session.waveform_json(470)));
    setBusy(false, "");
  } catch (err) {
    session = null;
    setBusy(false, `error: ${err}`);
  }
}

function play() {
  if (!session) return;
  audioCtx = audioCtx || new AudioContext();
  const samples = session.samples();
  const buffer = audioCtx.createBuffer(1, samples.length, session.sample_rate());
  buffer.copyToChannel(samples, 0);
  const source = audioCtx.createBufferSource();
  source.buffer = buffer;
  source.connect(audioCtx.destination);
  source.start();
}

async function rank() {
  if (!session) return;
  setBusy(true, "ranking features…");
  await new Promise((r) => setTimeout(r, 20));
  try {
    renderRanking(JSON.parse(session.rank_features(Number($("rank-k").value), 50)));
    setBusy(false, "");
  } catch (err) {
    setBusy(false, `error: ${err}`);
  }
}

async function evaluate() {
  if (!session) return;
  setBusy(true, "running cross-validation… (a few seconds)");
  await new Promise((r) => setTimeout(r, 20));
  try {
    const result = JSON.parse(
      session.evaluate(
        $("classifier").value,
        Number($("eval-k").value),
        Number($("complexity").value),
        Number($("folds").value),
        1
      )
    );
    drawRoc(result);
    setBusy(false, "");
  } catch (err) {
    setBusy(false, `error: ${err}`);
  }
}

$("classifier").addEventListener("change", () => {
  const kind = $("classifier").value;
  const label = $("complexity-label").childNodes[0];
  label.textContent = kind === "gmm" ? "gaussians " : kind === "mlp" ? "neurons " : "C (fixed 10) ";
  $("complexity").disabled = kind === "svm";
});
$("synthesize").addEventListener("click", synthesize);
$("play").addEventListener("click", play);
$("rank").addEventListener("click", rank);
$("evaluate").addEventListener("click", evaluate);

init().then(() => {
  setBusy(false, "");
  synthesize();
}).catch((err) => {
  status.textContent = `failed to load WebAssembly module: ${err}`;
});
