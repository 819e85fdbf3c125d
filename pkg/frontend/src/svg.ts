/**
 * Minimal SVG scene builder: linear scales, axes with ticks, polyline
 * series and legends. Output is a standalone SVG document string.
 */

export interface Margin {
  top: number;
  right: number;
  bottom: number;
  left: number;
}

export const DEFAULT_MARGIN: Margin = { top: 40, right: 150, bottom: 45, left: 60 };

export const PALETTE = [
  '#1f77b4', '#ff7f0e', '#2ca02c', '#d62728', '#9467bd', '#8c564b',
  '#e377c2', '#7f7f7f', '#bcbd22', '#17becf', '#aec7e8', '#ffbb78',
];

export function seriesColor(index: number): string {
  return PALETTE[index % PALETTE.length];
}

export class LinearScale {
  constructor(
    readonly domainMin: number,
    readonly domainMax: number,
    readonly rangeMin: number,
    readonly rangeMax: number,
  ) {}

  map(value: number): number {
    const span = this.domainMax - this.domainMin;
    const f = span === 0 ? 0.5 : (value - this.domainMin) / span;
    return this.rangeMin + f * (this.rangeMax - this.rangeMin);
  }

  ticks(count = 5): number[] {
    const span = this.domainMax - this.domainMin;
    if (span === 0) return [this.domainMin];
    const step = niceStep(span / count);
    const start = Math.ceil(this.domainMin / step) * step;
    const out: number[] = [];
    for (let v = start; v <= this.domainMax + 1e-9 * span; v += step) {
      out.push(Number(v.toPrecision(12)));
    }
    return out;
  }
}

function niceStep(raw: number): number {
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const f = raw / mag;
  if (f <= 1) return mag;
  if (f <= 2) return 2 * mag;
  if (f <= 5) return 5 * mag;
  return 10 * mag;
}

export function extent(values: number[]): [number, number] {
  let min = Infinity;
  let max = -Infinity;
  for (const v of values) {
    if (!Number.isFinite(v)) continue;
    if (v < min) min = v;
    if (v > max) max = v;
  }
  if (min > max) return [0, 1];
  if (min === max) return [min - 0.5, max + 0.5];
  return [min, max];
}

export function padExtent([min, max]: [number, number], frac = 0.05): [number, number] {
  const pad = (max - min) * frac;
  return [min - pad, max + pad];
}

function esc(text: string): string {
  return text.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function fmt(v: number): string {
  return Number(v.toPrecision(6)).toString();
}

export class Scene {
  private parts: string[] = [];

  constructor(readonly width: number, readonly height: number) {}

  add(fragment: string): void {
    this.parts.push(fragment);
  }

  text(x: number, y: number, content: string, attrs = ''): void {
    this.add(`<text x="${fmt(x)}" y="${fmt(y)}" font-family="sans-serif" ${attrs}>` +
      `${esc(content)}</text>`);
  }

  line(x1: number, y1: number, x2: number, y2: number, attrs: string): void {
    this.add(`<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" ` +
      `y2="${fmt(y2)}" ${attrs}/>`);
  }

  circle(cx: number, cy: number, r: number, attrs: string): void {
    this.add(`<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="${fmt(r)}" ${attrs}/>`);
  }

  rect(x: number, y: number, w: number, h: number, attrs: string): void {
    this.add(`<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" ` +
      `height="${fmt(h)}" ${attrs}/>`);
  }

  /** A data polyline; NaN points split the line into separate segments. */
  series(points: Array<[number, number]>, color: string, label: string,
         width = 1.5): void {
    const segments: string[] = [];
    let current: string[] = [];
    for (const [x, y] of points) {
      if (Number.isFinite(x) && Number.isFinite(y)) {
        current.push(`${fmt(x)},${fmt(y)}`);
      } else if (current.length > 0) {
        segments.push(current.join(' '));
        current = [];
      }
    }
    if (current.length > 0) segments.push(current.join(' '));
    const body = segments.map((pts) =>
      pts.includes(' ')
        ? `<polyline points="${pts}" fill="none" stroke="${color}" ` +
          `stroke-width="${width}"/>`
        : `<circle cx="${pts.split(',')[0]}" cy="${pts.split(',')[1]}" ` +
          `r="${2 * width}" fill="${color}"/>`,
    ).join('');
    this.add(`<g class="series" data-label="${esc(label)}">${body}</g>`);
  }

  axes(xScale: LinearScale, yScale: LinearScale, xLabel: string,
       yLabel: string): void {
    const x0 = xScale.rangeMin;
    const x1 = xScale.rangeMax;
    const yBottom = yScale.rangeMin;
    const yTop = yScale.rangeMax;
    this.line(x0, yBottom, x1, yBottom, 'stroke="#333"');
    this.line(x0, yBottom, x0, yTop, 'stroke="#333"');
    for (const t of xScale.ticks()) {
      const px = xScale.map(t);
      this.line(px, yBottom, px, yBottom + 4, 'stroke="#333"');
      this.text(px, yBottom + 18, fmt(t),
        'font-size="11" text-anchor="middle" fill="#333"');
    }
    for (const t of yScale.ticks()) {
      const py = yScale.map(t);
      this.line(x0 - 4, py, x0, py, 'stroke="#333"');
      this.text(x0 - 7, py + 4, fmt(t),
        'font-size="11" text-anchor="end" fill="#333"');
    }
    this.text((x0 + x1) / 2, yBottom + 36, xLabel,
      'font-size="12" text-anchor="middle" fill="#333"');
    this.text(14, (yBottom + yTop) / 2, yLabel,
      `font-size="12" text-anchor="middle" fill="#333" ` +
      `transform="rotate(-90 14 ${fmt((yBottom + yTop) / 2)})"`);
  }

  legend(entries: Array<{ label: string; color: string }>, x: number,
         y: number): void {
    const items = entries.map((e, i) => {
      const ly = y + 16 * i;
      return `<g class="legend-entry">` +
        `<line x1="${fmt(x)}" y1="${fmt(ly)}" x2="${fmt(x + 18)}" ` +
        `y2="${fmt(ly)}" stroke="${e.color}" stroke-width="2"/>` +
        `<text x="${fmt(x + 24)}" y="${fmt(ly + 4)}" font-size="11" ` +
        `font-family="sans-serif" fill="#333">${esc(e.label)}</text></g>`;
    }).join('');
    this.add(`<g class="legend">${items}</g>`);
  }

  title(content: string): void {
    this.text(this.width / 2, 22, content,
      'font-size="15" text-anchor="middle" fill="#111"');
  }

  render(): string {
    return `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" ` +
      `height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">` +
      `<rect width="${this.width}" height="${this.height}" fill="white"/>` +
      this.parts.join('') + '</svg>';
  }
}
