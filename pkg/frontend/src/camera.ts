// 2-D pan/zoom camera mapping workspace meters to canvas pixels.
// Screen y grows downward, world y upward.

export class Camera {
  cx = 1.0; // world point at the canvas center
  cy = 0.0;
  scale = 120; // px per meter

  constructor(
    public width: number,
    public height: number,
  ) {}

  worldToScreen(x: number, y: number): [number, number] {
    return [
      this.width / 2 + (x - this.cx) * this.scale,
      this.height / 2 - (y - this.cy) * this.scale,
    ];
  }

  screenToWorld(sx: number, sy: number): [number, number] {
    return [
      this.cx + (sx - this.width / 2) / this.scale,
      this.cy - (sy - this.height / 2) / this.scale,
    ];
  }

  pan(dxPx: number, dyPx: number): void {
    this.cx -= dxPx / this.scale;
    this.cy += dyPx / this.scale;
  }

  // Zoom keeping the world point under the cursor fixed on screen.
  zoomAt(sx: number, sy: number, factor: number): void {
    const [wx, wy] = this.screenToWorld(sx, sy);
    this.scale = Math.min(2000, Math.max(10, this.scale * factor));
    const [nx, ny] = this.screenToWorld(sx, sy);
    this.cx += wx - nx;
    this.cy += wy - ny;
  }
}
