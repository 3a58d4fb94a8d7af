/** Browser entry point: mount the explorer on the page it is served from. */

import { initApp } from './app.js';

initApp(window);
