from django.db import models


class ExperimentRun(models.Model):
    STATUS_SUCCESS = 'success'
    STATUS_CONFIG_ERROR = 'config-error'
    STATUS_NUMERICAL_ERROR = 'numerical-error'
    STATUS_IO_ERROR = 'io-error'
    STATUS_CHOICES = [
        (STATUS_SUCCESS, 'Succès'),
        (STATUS_CONFIG_ERROR, 'Erreur de configuration'),
        (STATUS_NUMERICAL_ERROR, 'Erreur numérique'),
        (STATUS_IO_ERROR, 'Erreur d\'entrée/sortie'),
    ]

    command = models.CharField(max_length=32, db_index=True)
    config_path = models.CharField(max_length=500, blank=True)
    config_hash = models.CharField(max_length=16, blank=True, db_index=True)
    seed = models.IntegerField(blank=True, null=True)
    status = models.CharField(max_length=20, choices=STATUS_CHOICES, db_index=True)
    exit_code = models.IntegerField(default=0)
    artifacts = models.JSONField(default=list, blank=True)  # Chemins des fichiers écrits
    message = models.TextField(blank=True)
    duration_ms = models.IntegerField(default=0)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-created_at', '-id']  # Plus récent en premier
        verbose_name = 'Exécution'
        verbose_name_plural = 'Exécutions'
        indexes = [
            models.Index(fields=['command', 'status'], name='run_command_status_idx'),
        ]

    def __str__(self):
        return f'{self.command} [{self.status}] {self.config_hash}'
