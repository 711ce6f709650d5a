/** Dependency-free canvas sparkline for the price tiles. */

export function drawSparkline(
  canvas: HTMLCanvasElement,
  series: number[],
  color = "#7dd3fc",
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  if (series.length < 2) return;

  const min = Math.min(...series);
  const max = Math.max(...series);
  const span = max - min || 1;
  const pad = 3;
  const x = (i: number) => pad + (i / (series.length - 1)) * (width - 2 * pad);
  const y = (v: number) => height - pad - ((v - min) / span) * (height - 2 * pad);

  ctx.beginPath();
  ctx.moveTo(x(0), y(series[0]));
  for (let i = 1; i < series.length; i++) ctx.lineTo(x(i), y(series[i]));
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.5;
  ctx.stroke();

  ctx.beginPath();
  ctx.arc(x(series.length - 1), y(series[series.length - 1]), 2.5, 0, Math.PI * 2);
  ctx.fillStyle = color;
  ctx.fill();
}
