// Presentation helpers: elapsed-time text and overlay geometry.

export function timeAgo(iso: string, now: Date = new Date()): string {
  const then = new Date(iso).getTime();
  if (Number.isNaN(then)) return "unknown";
  let seconds = Math.max(0, Math.floor((now.getTime() - then) / 1000));
  if (seconds < 60) return `${seconds}s ago`;
  const minutes = Math.floor(seconds / 60);
  if (minutes < 60) return `${minutes}m ago`;
  const hours = Math.floor(minutes / 60);
  if (hours < 48) return `${hours}h ago`;
  return `${Math.floor(hours / 24)}d ago`;
}

export interface OverlayRect {
  left: number;
  top: number;
  width: number;
  height: number;
}

/** Map a stored bbox (original pixels) into display pixels at `scale`. */
export function overlayRect(
  bbox: [number, number, number, number],
  scale: number,
): OverlayRect {
  const [xMin, yMin, xMax, yMax] = bbox;
  return {
    left: xMin * scale,
    top: yMin * scale,
    width: (xMax - xMin) * scale,
    height: (yMax - yMin) * scale,
  };
}

export function confidencePct(confidence: number): string {
  return `${(confidence * 100).toFixed(1)}%`;
}
